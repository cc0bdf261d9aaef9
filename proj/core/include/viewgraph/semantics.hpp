#pragma once

#include <cstddef>
#include <random>
#include <span>

#include "viewgraph/tensor.hpp"

namespace viewgraph {

/// Learned filters of the latent semantic mapping. Row n of `filters` and
/// `offsets[n]` score the similarity of a view feature to latent pattern n.
struct LatentMapParams {
    Matrix filters;  // N x D_low
    Vector offsets;  // N

    std::size_t patterns() const noexcept { return filters.rows(); }
    std::size_t feature_dim() const noexcept { return filters.cols(); }

    /// Filters ~ N(0, (1/sqrt(D_low))^2), offsets zero.
    static LatentMapParams initialize(std::size_t patterns, std::size_t feature_dim, std::mt19937_64& rng);

    friend bool operator==(const LatentMapParams&, const LatentMapParams&) = default;
};

/// Soft assignment of one view feature to the N latent patterns:
/// softmax_n(f · filters[n] + offsets[n]). Sums to one.
Vector embed(std::span<const double> feature, const LatentMapParams& params);

struct EmbedGradients {
    Vector feature;   // dL/df
    Matrix filters;   // dL/dfilters
    Vector offsets;   // dL/doffsets
};

/// Backward pass of `embed`. `embedding` must be embed(feature, params).
EmbedGradients embed_backward(std::span<const double> feature, const LatentMapParams& params,
                              std::span<const double> embedding, std::span<const double> upstream);

/// Convenience overload that recomputes the embedding.
EmbedGradients embed_backward(std::span<const double> feature, const LatentMapParams& params,
                              std::span<const double> upstream);

}  // namespace viewgraph
