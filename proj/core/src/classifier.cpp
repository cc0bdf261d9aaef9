#include "viewgraph/classifier.hpp"

#include <cmath>
#include <string>

#include "viewgraph/error.hpp"

namespace viewgraph {

ClassifierParams ClassifierParams::initialize(std::size_t input_dim, std::size_t feature_dim, std::size_t classes,
                                              std::mt19937_64& rng) {
    ClassifierParams p{Matrix(feature_dim, input_dim), Vector(feature_dim, 0.0), Matrix(classes, feature_dim),
                       Vector(classes, 0.0)};
    std::normal_distribution<double> hidden(0.0, 1.0);
    for (double& v : p.feature_weights.flat()) v = hidden(rng);
    std::normal_distribution<double> output(0.0, 1.0 / std::sqrt(static_cast<double>(feature_dim)));
    for (double& v : p.weights.flat()) v = output(rng);
    return p;
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Vector global_feature(const Matrix& aggregated, const ClassifierParams& params) {
    if (aggregated.size() != params.input_dim())
        throw InvalidArgument("aggregated correlation has " + std::to_string(aggregated.size()) +
                              " entries, global feature layer expects " + std::to_string(params.input_dim()));
    if (params.feature_bias.size() != params.feature_weights.rows())
        throw InvalidArgument("global feature bias length mismatch");
    Vector f = matvec(params.feature_weights, aggregated.flat());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = sigmoid(f[i] + params.feature_bias[i]);
    return f;
}

Vector classify(std::span<const double> feature, const ClassifierParams& params) {
    if (feature.size() != params.feature_dim()) throw InvalidArgument("global feature length mismatch");
    if (params.bias.size() != params.classes()) throw InvalidArgument("classifier bias length mismatch");
    Vector z = matvec(params.weights, feature);
    for (std::size_t l = 0; l < z.size(); ++l) z[l] += params.bias[l];
    return softmax(z);
}

Vector one_hot(std::size_t label, std::size_t classes) {
    if (label >= classes) throw InvalidArgument("label out of range");
    Vector q(classes, 0.0);
    q[label] = 1.0;
    return q;
}

LossValue sample_loss(std::span<const double> probabilities, std::size_t label) {
    if (label >= probabilities.size()) throw InvalidArgument("label out of range");
    const double p = probabilities[label];
    return {-std::log(std::max(p, kLogClamp)), p < kLogClamp};
}

LossValue nll_loss(std::span<const Vector> probabilities, std::span<const Vector> truths) {
    if (probabilities.size() != truths.size()) throw InvalidArgument("nll_loss: batch length mismatch");
    if (probabilities.empty()) throw InvalidArgument("nll_loss: empty batch");
    LossValue total;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const auto& q = truths[i];
        if (q.size() != probabilities[i].size()) throw InvalidArgument("nll_loss: class count mismatch");
        std::size_t label = q.size();
        for (std::size_t a = 0; a < q.size(); ++a) {
            if (q[a] == 1.0 && label == q.size()) {
                label = a;
            } else if (q[a] != 0.0) {
                throw InvalidArgument("nll_loss: truth is not one-hot");
            }
        }
        if (label == q.size()) throw InvalidArgument("nll_loss: truth is not one-hot");
        const LossValue s = sample_loss(probabilities[i], label);
        total.value += s.value;
        total.clamped = total.clamped || s.clamped;
    }
    total.value /= static_cast<double>(probabilities.size());
    return total;
}

ClassifierGradients classifier_backward(const Matrix& aggregated, const ClassifierParams& params,
                                        std::span<const double> feature, std::span<const double> probabilities,
                                        std::size_t label, double weight) {
    if (probabilities.size() != params.classes() || label >= params.classes())
        throw InvalidArgument("classifier_backward: label/probability mismatch");
    if (feature.size() != params.feature_dim() || aggregated.size() != params.input_dim())
        throw InvalidArgument("classifier_backward: dimension mismatch");

    ClassifierGradients g;
    g.logits.assign(probabilities.begin(), probabilities.end());
    g.logits[label] -= 1.0;
    for (double& v : g.logits) v *= weight;

    g.params.weights = Matrix(params.weights.rows(), params.weights.cols());
    add_outer(g.params.weights, g.logits, feature);
    g.params.bias = g.logits;

    Vector pre = matvec_transposed(params.weights, g.logits);
    for (std::size_t i = 0; i < pre.size(); ++i) pre[i] *= feature[i] * (1.0 - feature[i]);
    g.params.feature_weights = Matrix(params.feature_weights.rows(), params.feature_weights.cols());
    add_outer(g.params.feature_weights, pre, aggregated.flat());
    g.params.feature_bias = pre;

    const Vector flat = matvec_transposed(params.feature_weights, pre);
    g.aggregated = Matrix(aggregated.rows(), aggregated.cols());
    std::copy(flat.begin(), flat.end(), g.aggregated.flat().begin());
    return g;
}

}  // namespace viewgraph
