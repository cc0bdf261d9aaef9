#include "viewgraph/attention.hpp"

#include <cmath>

#include "viewgraph/error.hpp"

namespace viewgraph {
namespace {

void check_shapes(std::span<const Matrix> correlations, const Matrix& classifier_weights,
                  const AttentionParams& params) {
    if (correlations.empty()) throw InvalidArgument("attention needs at least one view node");
    const std::size_t classes = params.projection.rows();
    const std::size_t rows = params.projection.cols();
    const std::size_t cols = params.column_weights.size();
    for (const auto& c : correlations)
        if (c.rows() != rows || c.cols() != cols)
            throw InvalidArgument("cumulative correlation shape does not match attention projection");
    if (params.bias.size() != classes || params.readout.size() != classes)
        throw InvalidArgument("attention bias/readout length does not match class count");
    if (classifier_weights.rows() != classes || classifier_weights.cols() != params.classifier_weights.size())
        throw InvalidArgument("classifier weights do not match attention parameters");
}

// W_F ω_F + b, identical for every node.
Vector shared_term(const Matrix& scoring_classifier, const AttentionParams& params) {
    Vector shared = matvec(scoring_classifier, params.classifier_weights);
    for (std::size_t l = 0; l < shared.size(); ++l) shared[l] += params.bias[l];
    return shared;
}

}  // namespace

AttentionParams AttentionParams::initialize(std::size_t classes, std::size_t rows, std::size_t cols,
                                            std::size_t features, std::mt19937_64& rng, double scale) {
    AttentionParams p{Matrix(classes, rows), Vector(cols), Vector(features), Vector(classes, 0.0),
                      Vector(classes)};
    std::normal_distribution<double> dist(0.0, scale);
    for (double& v : p.projection.flat()) v = dist(rng);
    for (double& v : p.column_weights) v = dist(rng);
    for (double& v : p.classifier_weights) v = dist(rng);
    for (double& v : p.readout) v = dist(rng);
    return p;
}

Vector attention_scores(std::span<const Matrix> correlations, const Matrix& classifier_weights,
                        const AttentionParams& params, const AttentionOptions& options) {
    check_shapes(correlations, classifier_weights, params);
    const Matrix ones_classifier =
        options.constant_classifier ? Matrix(classifier_weights.rows(), classifier_weights.cols(), 1.0) : Matrix();
    const Vector shared =
        shared_term(options.constant_classifier ? ones_classifier : classifier_weights, params);
    const Matrix ones_correlation = options.constant_correlation
                                        ? Matrix(correlations.front().rows(), correlations.front().cols(), 1.0)
                                        : Matrix();

    Vector scores(correlations.size());
    for (std::size_t j = 0; j < correlations.size(); ++j) {
        const Matrix& x = options.constant_correlation ? ones_correlation : correlations[j];
        Vector u = matvec(params.projection, matvec(x, params.column_weights));
        for (std::size_t l = 0; l < u.size(); ++l) u[l] += shared[l];
        scores[j] = dot(params.readout, u);
    }
    return scores;
}

Vector normalize_attention(std::span<const double> scores) {
    if (!all_finite(scores)) throw InvalidArgument("attention scores contain non-finite values");
    return softmax(scores);
}

Matrix aggregate(std::span<const Matrix> correlations, std::span<const double> alpha) {
    if (correlations.size() != alpha.size() || correlations.empty())
        throw InvalidArgument("aggregate: attention length does not match node count");
    Matrix out(correlations.front().rows(), correlations.front().cols());
    for (std::size_t j = 0; j < correlations.size(); ++j) {
        if (!correlations[j].same_shape(out)) throw InvalidArgument("aggregate: inconsistent correlation shapes");
        auto dst = out.flat();
        auto src = correlations[j].flat();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += alpha[j] * src[i];
    }
    return out;
}

AttentionResult attend(std::span<const Matrix> correlations, const Matrix& classifier_weights,
                       const AttentionParams& params, const AttentionOptions& options) {
    AttentionResult r;
    if (options.uniform) {
        check_shapes(correlations, classifier_weights, params);
        r.scores.assign(correlations.size(), 0.0);
        r.alpha.assign(correlations.size(), 1.0 / static_cast<double>(correlations.size()));
    } else {
        r.scores = attention_scores(correlations, classifier_weights, params, options);
        r.alpha = normalize_attention(r.scores);
    }
    r.aggregated = aggregate(correlations, r.alpha);
    return r;
}

AttentionGradients attention_backward(std::span<const Matrix> correlations, const Matrix& classifier_weights,
                                      const AttentionParams& params, std::span<const double> alpha,
                                      const Matrix& upstream, const AttentionOptions& options) {
    check_shapes(correlations, classifier_weights, params);
    if (alpha.size() != correlations.size()) throw InvalidArgument("attention weights do not match node count");
    if (!upstream.same_shape(correlations.front()))
        throw InvalidArgument("aggregated correlation gradient has the wrong shape");

    const std::size_t views = correlations.size();
    AttentionGradients g;
    g.params = AttentionParams{Matrix(params.projection.rows(), params.projection.cols()),
                               Vector(params.column_weights.size(), 0.0),
                               Vector(params.classifier_weights.size(), 0.0), Vector(params.bias.size(), 0.0),
                               Vector(params.readout.size(), 0.0)};
    g.classifier_weights = Matrix(classifier_weights.rows(), classifier_weights.cols());
    g.correlations.reserve(views);

    Vector alpha_grad(views);
    for (std::size_t j = 0; j < views; ++j) {
        alpha_grad[j] = dot(upstream.flat(), correlations[j].flat());
        Matrix dc = upstream;
        dc *= alpha[j];
        g.correlations.push_back(std::move(dc));
    }
    if (options.uniform) return g;

    const Vector score_grad = softmax_backward(alpha, alpha_grad);
    const Matrix ones_classifier =
        options.constant_classifier ? Matrix(classifier_weights.rows(), classifier_weights.cols(), 1.0) : Matrix();
    const Matrix& scoring_classifier = options.constant_classifier ? ones_classifier : classifier_weights;
    const Vector shared = shared_term(scoring_classifier, params);
    const Matrix ones_correlation = options.constant_correlation
                                        ? Matrix(correlations.front().rows(), correlations.front().cols(), 1.0)
                                        : Matrix();

    Vector shared_grad(params.bias.size(), 0.0);
    for (std::size_t j = 0; j < views; ++j) {
        const Matrix& x = options.constant_correlation ? ones_correlation : correlations[j];
        const Vector projected_cols = matvec(x, params.column_weights);
        Vector u = matvec(params.projection, projected_cols);
        for (std::size_t l = 0; l < u.size(); ++l) u[l] += shared[l];

        for (std::size_t l = 0; l < u.size(); ++l) {
            g.params.readout[l] += score_grad[j] * u[l];
            shared_grad[l] += score_grad[j] * params.readout[l];
        }
        Vector du(params.readout);
        for (double& v : du) v *= score_grad[j];
        add_outer(g.params.projection, du, projected_cols);
        const Vector dcols = matvec_transposed(params.projection, du);
        const Vector dw = matvec_transposed(x, dcols);
        for (std::size_t k = 0; k < dw.size(); ++k) g.params.column_weights[k] += dw[k];
        if (!options.constant_correlation) add_outer(g.correlations[j], dcols, params.column_weights);
    }

    g.params.bias = shared_grad;
    g.params.classifier_weights = matvec_transposed(scoring_classifier, shared_grad);
    if (!options.constant_classifier) add_outer(g.classifier_weights, shared_grad, params.classifier_weights);
    return g;
}

}  // namespace viewgraph
