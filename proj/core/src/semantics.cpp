#include "viewgraph/semantics.hpp"

#include <cmath>

#include "viewgraph/error.hpp"

namespace viewgraph {
namespace {

void check_shapes(std::span<const double> feature, const LatentMapParams& params) {
    if (params.patterns() < 2) throw InvalidArgument("latent mapping needs at least two patterns");
    if (params.offsets.size() != params.patterns())
        throw InvalidArgument("latent offsets do not match filter count");
    if (feature.size() != params.feature_dim())
        throw InvalidArgument("view feature length " + std::to_string(feature.size()) +
                              " does not match filter width " + std::to_string(params.feature_dim()));
    if (!all_finite(feature)) throw InvalidArgument("view feature contains non-finite values");
}

}  // namespace

LatentMapParams LatentMapParams::initialize(std::size_t patterns, std::size_t feature_dim,
                                            std::mt19937_64& rng) {
    LatentMapParams p{Matrix(patterns, feature_dim), Vector(patterns, 0.0)};
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(feature_dim)));
    for (double& w : p.filters.flat()) w = dist(rng);
    return p;
}

Vector embed(std::span<const double> feature, const LatentMapParams& params) {
    check_shapes(feature, params);
    Vector logits = matvec(params.filters, feature);
    for (std::size_t n = 0; n < logits.size(); ++n) logits[n] += params.offsets[n];
    return softmax(logits);
}

EmbedGradients embed_backward(std::span<const double> feature, const LatentMapParams& params,
                              std::span<const double> embedding, std::span<const double> upstream) {
    check_shapes(feature, params);
    if (embedding.size() != params.patterns() || upstream.size() != params.patterns())
        throw InvalidArgument("embedding gradient length does not match pattern count");
    EmbedGradients g;
    g.offsets = softmax_backward(embedding, upstream);
    g.filters = Matrix(params.patterns(), params.feature_dim());
    add_outer(g.filters, g.offsets, feature);
    g.feature = matvec_transposed(params.filters, g.offsets);
    return g;
}

EmbedGradients embed_backward(std::span<const double> feature, const LatentMapParams& params,
                              std::span<const double> upstream) {
    const Vector d = embed(feature, params);
    return embed_backward(feature, params, d, upstream);
}

}  // namespace viewgraph
