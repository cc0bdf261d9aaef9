#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "viewgraph/attention.hpp"
#include "viewgraph/classifier.hpp"
#include "viewgraph/config.hpp"
#include "viewgraph/dataio.hpp"
#include "viewgraph/semantics.hpp"

namespace viewgraph {

/// Every learnable parameter of the aggregation network.
struct ModelParams {
    LatentMapParams latent;
    AttentionParams attention;
    ClassifierParams classifier;

    /// Seeded initialization for the dimensions in `config` (latent filters are
    /// empty when config.flags.no_latent).
    static ModelParams initialize(const TrainConfig& config, std::uint64_t seed);
    static ModelParams zeros(const TrainConfig& config);

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Named view of one parameter block; order matches the checkpoint layout.
template <typename T>
struct BlockRef {
    std::string_view name;
    std::size_t rows;
    std::size_t cols;
    std::span<T> values;
};

std::vector<BlockRef<double>> blocks(ModelParams& params);
std::vector<BlockRef<const double>> blocks(const ModelParams& params);

/// dO/dθ for every block of ModelParams. `params.classifier.weights` holds the
/// W_F gradient that is applied (classifier path plus attention path unless
/// dropped); `attention_wf` holds the attention-path part on its own.
struct Gradients {
    ModelParams params;
    Matrix attention_wf;

    static Gradients zeros(const TrainConfig& config);
    Gradients& operator+=(const Gradients& other);
};

/// Cached intermediates of one forward pass.
struct ForwardTrace {
    std::vector<Vector> embeddings;     // d_j (or raw f_j with no_latent)
    std::vector<Matrix> correlations;   // C_j; empty for pooling variants
    Vector scores;                      // raw attention scores; empty for pooling variants
    Vector alpha;                       // attention weights; empty for pooling variants
    std::vector<std::size_t> argmax;    // max-pool winners per entry
    Matrix aggregated;                  // C (or pooled vector as R x 1)
    Vector feature;                     // global feature F
    Vector probabilities;               // P
};

ForwardTrace forward(const ShapeSample& shape, const ModelParams& params, const TrainConfig& config);

/// Gradients of weight * (-log P[label]) for the traced shape.
Gradients backward(const ForwardTrace& trace, const ShapeSample& shape, const ModelParams& params,
                   const TrainConfig& config, double weight = 1.0);

/// Mean loss of the shapes under the current parameters.
double mean_loss(std::span<const ShapeSample> shapes, const ModelParams& params, const TrainConfig& config);

/// Throws InvalidArgument when `params` do not have the shapes `config` implies.
void check_params(const ModelParams& params, const TrainConfig& config);

/// Index of the largest probability; ties resolve to the lowest index.
std::size_t predicted_class(std::span<const double> probabilities);

}  // namespace viewgraph
