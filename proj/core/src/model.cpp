#include "viewgraph/model.hpp"

#include <algorithm>

#include "viewgraph/correlation.hpp"
#include "viewgraph/error.hpp"
#include "viewgraph/geometry.hpp"

namespace viewgraph {
namespace {

template <typename P, typename T>
std::vector<BlockRef<T>> make_blocks(P& p) {
    auto mat = [](std::string_view name, auto& m) {
        return BlockRef<T>{name, m.rows(), m.cols(), m.flat()};
    };
    auto vec = [](std::string_view name, auto& v) {
        return BlockRef<T>{name, v.size(), 1, std::span<T>(v.data(), v.size())};
    };
    return {
        mat("latent.filters", p.latent.filters),
        vec("latent.offsets", p.latent.offsets),
        mat("attention.projection", p.attention.projection),
        vec("attention.column_weights", p.attention.column_weights),
        vec("attention.classifier_weights", p.attention.classifier_weights),
        vec("attention.bias", p.attention.bias),
        vec("attention.readout", p.attention.readout),
        mat("classifier.feature_weights", p.classifier.feature_weights),
        vec("classifier.feature_bias", p.classifier.feature_bias),
        mat("classifier.weights", p.classifier.weights),
        vec("classifier.bias", p.classifier.bias),
    };
}

CorrelationOptions correlation_options(const TrainConfig& config) {
    return {config.include_self, config.flags.no_correlation};
}

AttentionOptions attention_options(const TrainConfig& config) {
    return {config.flags.no_attention, config.flags.no_attention_c, config.flags.no_attention_wf};
}

ViewGraph shape_graph(const ShapeSample& shape, const TrainConfig& config) {
    return ViewGraph(shape.directions, config.flags.no_spatiality ? 0.0 : config.sigma);
}

void check_shape(const ShapeSample& shape, const TrainConfig& config) {
    if (shape.views() != config.views || shape.directions.size() != config.views)
        throw InvalidArgument("shape has " + std::to_string(shape.views()) + " views, model expects " +
                              std::to_string(config.views));
    if (shape.features.cols() != config.feature_dim)
        throw InvalidArgument("shape feature dimension " + std::to_string(shape.features.cols()) +
                              " does not match model (" + std::to_string(config.feature_dim) + ")");
    if (shape.label >= config.classes) throw InvalidArgument("shape label outside the model's classes");
}

}  // namespace

ModelParams ModelParams::initialize(const TrainConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    ModelParams p;
    if (!config.flags.no_latent) p.latent = LatentMapParams::initialize(config.patterns, config.feature_dim, rng);
    const std::size_t rows = config.correlation_rows();
    const std::size_t cols = config.correlation_cols();
    p.attention = AttentionParams::initialize(config.classes, rows, cols, config.features, rng);
    p.classifier = ClassifierParams::initialize(rows * cols, config.features, config.classes, rng);
    return p;
}

ModelParams ModelParams::zeros(const TrainConfig& config) {
    ModelParams p;
    if (!config.flags.no_latent)
        p.latent = {Matrix(config.patterns, config.feature_dim), Vector(config.patterns, 0.0)};
    const std::size_t rows = config.correlation_rows();
    const std::size_t cols = config.correlation_cols();
    const std::size_t l = config.classes;
    p.attention = {Matrix(l, rows), Vector(cols, 0.0), Vector(config.features, 0.0), Vector(l, 0.0), Vector(l, 0.0)};
    p.classifier = {Matrix(config.features, rows * cols), Vector(config.features, 0.0), Matrix(l, config.features),
                    Vector(l, 0.0)};
    return p;
}

std::vector<BlockRef<double>> blocks(ModelParams& params) { return make_blocks<ModelParams, double>(params); }

std::vector<BlockRef<const double>> blocks(const ModelParams& params) {
    return make_blocks<const ModelParams, const double>(params);
}

void check_params(const ModelParams& params, const TrainConfig& config) {
    const auto expected = blocks(ModelParams::zeros(config));
    const auto actual = blocks(params);
    for (std::size_t b = 0; b < expected.size(); ++b)
        if (expected[b].rows * expected[b].cols != actual[b].values.size() || expected[b].rows != actual[b].rows)
            throw InvalidArgument("parameter block " + std::string(expected[b].name) +
                                  " does not match the model configuration");
}

Gradients Gradients::zeros(const TrainConfig& config) {
    return {ModelParams::zeros(config), Matrix(config.classes, config.features)};
}

Gradients& Gradients::operator+=(const Gradients& other) {
    auto dst = blocks(params);
    const auto src = blocks(other.params);
    for (std::size_t b = 0; b < dst.size(); ++b) {
        if (dst[b].values.size() != src[b].values.size()) throw InvalidArgument("gradient shape mismatch");
        for (std::size_t i = 0; i < dst[b].values.size(); ++i) dst[b].values[i] += src[b].values[i];
    }
    attention_wf += other.attention_wf;
    return *this;
}

ForwardTrace forward(const ShapeSample& shape, const ModelParams& params, const TrainConfig& config) {
    check_shape(shape, config);
    check_params(params, config);
    const std::size_t views = shape.views();
    const std::size_t dim = config.embedding_dim();

    ForwardTrace t;
    t.embeddings.reserve(views);
    for (std::size_t j = 0; j < views; ++j) {
        const auto row = shape.features.row(j);
        if (config.flags.no_latent) {
            if (!all_finite(row)) throw InvalidArgument("view feature contains non-finite values");
            t.embeddings.emplace_back(row.begin(), row.end());
        } else {
            t.embeddings.push_back(embed(row, params.latent));
        }
    }

    if (config.flags.pooled()) {
        t.aggregated = Matrix(dim, 1);
        if (config.flags.mean_pool) {
            for (const auto& d : t.embeddings)
                for (std::size_t n = 0; n < dim; ++n) t.aggregated(n, 0) += d[n];
            t.aggregated *= 1.0 / static_cast<double>(views);
        } else {
            t.argmax.assign(dim, 0);
            for (std::size_t n = 0; n < dim; ++n) {
                for (std::size_t j = 1; j < views; ++j)
                    if (t.embeddings[j][n] > t.embeddings[t.argmax[n]][n]) t.argmax[n] = j;
                t.aggregated(n, 0) = t.embeddings[t.argmax[n]][n];
            }
        }
    } else {
        const ViewGraph graph = shape_graph(shape, config);
        const CorrelationOptions copts = correlation_options(config);
        t.correlations.reserve(views);
        for (std::size_t j = 0; j < views; ++j)
            t.correlations.push_back(cumulative_correlation(j, t.embeddings, graph, copts));
        AttentionResult att =
            attend(t.correlations, params.classifier.weights, params.attention, attention_options(config));
        t.scores = std::move(att.scores);
        t.alpha = std::move(att.alpha);
        t.aggregated = std::move(att.aggregated);
    }

    t.feature = global_feature(t.aggregated, params.classifier);
    t.probabilities = classify(t.feature, params.classifier);
    return t;
}

Gradients backward(const ForwardTrace& trace, const ShapeSample& shape, const ModelParams& params,
                   const TrainConfig& config, double weight) {
    check_shape(shape, config);
    check_params(params, config);
    const std::size_t views = shape.views();
    const std::size_t dim = config.embedding_dim();
    const bool pooled = config.flags.pooled();
    const bool stale =
        trace.embeddings.size() != views ||
        std::any_of(trace.embeddings.begin(), trace.embeddings.end(), [&](const Vector& d) { return d.size() != dim; }) ||
        trace.aggregated.rows() != config.correlation_rows() || trace.aggregated.cols() != config.correlation_cols() ||
        trace.feature.size() != config.features || trace.probabilities.size() != config.classes ||
        (pooled ? !trace.correlations.empty() : (trace.correlations.size() != views || trace.alpha.size() != views)) ||
        (config.flags.max_pool && trace.argmax.size() != dim);
    if (stale) throw InvalidState("forward trace does not match the model configuration");

    Gradients g = Gradients::zeros(config);
    ClassifierGradients cg = classifier_backward(trace.aggregated, params.classifier, trace.feature,
                                                 trace.probabilities, shape.label, weight);
    g.params.classifier = std::move(cg.params);

    std::vector<Vector> dembed(views, Vector(dim, 0.0));
    if (pooled) {
        for (std::size_t n = 0; n < dim; ++n) {
            const double up = cg.aggregated(n, 0);
            if (config.flags.mean_pool) {
                for (std::size_t j = 0; j < views; ++j) dembed[j][n] += up / static_cast<double>(views);
            } else {
                dembed[trace.argmax[n]][n] += up;
            }
        }
    } else {
        AttentionGradients ag = attention_backward(trace.correlations, params.classifier.weights, params.attention,
                                                   trace.alpha, cg.aggregated, attention_options(config));
        g.params.attention = std::move(ag.params);
        g.attention_wf = std::move(ag.classifier_weights);
        if (!config.flags.drop_attention_wf_gradient) g.params.classifier.weights += g.attention_wf;

        const ViewGraph graph = shape_graph(shape, config);
        const CorrelationOptions copts = correlation_options(config);
        for (std::size_t j = 0; j < views; ++j) {
            const auto grads = correlation_backward(j, trace.embeddings, graph, ag.correlations[j], copts);
            for (std::size_t k = 0; k < views; ++k)
                for (std::size_t n = 0; n < dim; ++n) dembed[k][n] += grads[k][n];
        }
    }

    if (!config.flags.no_latent) {
        for (std::size_t j = 0; j < views; ++j) {
            const EmbedGradients eg =
                embed_backward(shape.features.row(j), params.latent, trace.embeddings[j], dembed[j]);
            g.params.latent.filters += eg.filters;
            for (std::size_t n = 0; n < dim; ++n) g.params.latent.offsets[n] += eg.offsets[n];
        }
    }
    return g;
}

double mean_loss(std::span<const ShapeSample> shapes, const ModelParams& params, const TrainConfig& config) {
    if (shapes.empty()) throw InvalidArgument("mean_loss of an empty set");
    double total = 0.0;
    for (const auto& s : shapes) total += sample_loss(forward(s, params, config).probabilities, s.label).value;
    return total / static_cast<double>(shapes.size());
}

std::size_t predicted_class(std::span<const double> probabilities) {
    if (probabilities.empty()) throw InvalidArgument("no class probabilities");
    return static_cast<std::size_t>(std::max_element(probabilities.begin(), probabilities.end()) -
                                    probabilities.begin());
}

}  // namespace viewgraph
