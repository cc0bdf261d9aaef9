#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "viewgraph/tensor.hpp"

namespace viewgraph {

/// Parameters of the view attention. With C_j of shape R x K, classifier
/// weights W_F of shape L x F:
///   score_j = readout · (projection C_j column_weights + W_F classifier_weights + bias)
struct AttentionParams {
    Matrix projection;       // W_C, L x R
    Vector column_weights;   // ω_C, K
    Vector classifier_weights;  // ω_F, F
    Vector bias;             // b, L
    Vector readout;          // ω, L

    /// All entries ~ N(0, scale^2) except the bias, which starts at zero.
    static AttentionParams initialize(std::size_t classes, std::size_t rows, std::size_t cols,
                                      std::size_t features, std::mt19937_64& rng, double scale = 0.01);

    friend bool operator==(const AttentionParams&, const AttentionParams&) = default;
};

/// Ablation switches for the attention stage.
struct AttentionOptions {
    /// Skip scoring entirely: alpha_j = 1 / V.
    bool uniform = false;
    /// Score with an all-ones matrix in place of every C_j.
    bool constant_correlation = false;
    /// Score with an all-ones matrix in place of W_F.
    bool constant_classifier = false;
};

/// Raw attention score of every view node.
Vector attention_scores(std::span<const Matrix> correlations, const Matrix& classifier_weights,
                        const AttentionParams& params, const AttentionOptions& options = {});

/// Softmax over raw scores. Throws on non-finite input.
Vector normalize_attention(std::span<const double> scores);

/// C = sum_j alpha_j C_j.
Matrix aggregate(std::span<const Matrix> correlations, std::span<const double> alpha);

struct AttentionResult {
    Vector scores;
    Vector alpha;
    Matrix aggregated;
};

/// scores -> alpha -> aggregate, honoring the ablation switches.
AttentionResult attend(std::span<const Matrix> correlations, const Matrix& classifier_weights,
                       const AttentionParams& params, const AttentionOptions& options = {});

struct AttentionGradients {
    AttentionParams params;
    std::vector<Matrix> correlations;
    /// Contribution reaching W_F through the attention scores (not the classifier path).
    Matrix classifier_weights;
};

/// Backward pass of `attend` given dL/dC for the aggregated correlation.
AttentionGradients attention_backward(std::span<const Matrix> correlations, const Matrix& classifier_weights,
                                      const AttentionParams& params, std::span<const double> alpha,
                                      const Matrix& upstream, const AttentionOptions& options = {});

}  // namespace viewgraph
