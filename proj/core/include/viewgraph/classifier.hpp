#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "viewgraph/tensor.hpp"

namespace viewgraph {

/// Lower clamp applied to the true-class probability inside the log.
inline constexpr double kLogClamp = 1e-12;

struct ClassifierParams {
    Matrix feature_weights;  // W_G, F x (rows*cols of the aggregated correlation)
    Vector feature_bias;     // b_G, F
    Matrix weights;          // W_F, L x F
    Vector bias;             // b_F, L

    std::size_t classes() const noexcept { return weights.rows(); }
    std::size_t feature_dim() const noexcept { return weights.cols(); }
    std::size_t input_dim() const noexcept { return feature_weights.cols(); }

    static ClassifierParams initialize(std::size_t input_dim, std::size_t feature_dim, std::size_t classes,
                                       std::mt19937_64& rng);

    friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;
};

double sigmoid(double x) noexcept;

/// sigmoid(W_G vec(C) + b_G); vec() flattens row-major.
Vector global_feature(const Matrix& aggregated, const ClassifierParams& params);

/// softmax(W_F F + b_F)
Vector classify(std::span<const double> feature, const ClassifierParams& params);

Vector one_hot(std::size_t label, std::size_t classes);

struct LossValue {
    double value = 0.0;
    /// True when some true-class probability fell below kLogClamp.
    bool clamped = false;
};

/// -log P[label] with the probability clamped at kLogClamp.
LossValue sample_loss(std::span<const double> probabilities, std::size_t label);

/// Mean negative log-likelihood over a batch; `truths` must be one-hot.
LossValue nll_loss(std::span<const Vector> probabilities, std::span<const Vector> truths);

struct ClassifierGradients {
    ClassifierParams params;
    Matrix aggregated;  // dL/dC, shape of the aggregated correlation
    Vector logits;      // dL/dz
};

/// Backward pass for one sample whose loss enters the objective with `weight`
/// (1/M for a batch mean). The W_F gradient is the classifier path only.
ClassifierGradients classifier_backward(const Matrix& aggregated, const ClassifierParams& params,
                                        std::span<const double> feature, std::span<const double> probabilities,
                                        std::size_t label, double weight = 1.0);

}  // namespace viewgraph
