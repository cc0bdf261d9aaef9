#include "viewgraph/correlation.hpp"

#include "viewgraph/error.hpp"

namespace viewgraph {
namespace {

void check_inputs(std::size_t node, std::span<const Vector> embeddings, const ViewGraph& graph) {
    if (embeddings.size() != graph.size())
        throw InvalidArgument("embedding count does not match view graph size");
    if (node >= embeddings.size()) throw InvalidArgument("node index out of range");
    const std::size_t n = embeddings.front().size();
    for (const auto& d : embeddings)
        if (d.size() != n) throw InvalidArgument("embeddings have inconsistent lengths");
}

// m_j = sum_j' s_jj' d_j' over the included partners, and sum_j' s_jj'.
Vector weighted_partner_sum(std::size_t node, std::span<const Vector> embeddings, const ViewGraph& graph,
                            const CorrelationOptions& options, double& weight_total) {
    Vector m(embeddings.front().size(), 0.0);
    weight_total = 0.0;
    for (std::size_t k = 0; k < embeddings.size(); ++k) {
        if (k == node && !options.include_self) continue;
        const double s = graph.similarity(node, k);
        weight_total += s;
        for (std::size_t n = 0; n < m.size(); ++n) m[n] += s * embeddings[k][n];
    }
    return m;
}

}  // namespace

Matrix pattern_correlation(std::span<const double> first, std::span<const double> second) {
    if (first.size() != second.size()) throw InvalidArgument("pattern_correlation: length mismatch");
    Matrix c(first.size(), second.size());
    add_outer(c, first, second);
    return c;
}

Matrix cumulative_correlation(std::size_t node, std::span<const Vector> embeddings, const ViewGraph& graph,
                              const CorrelationOptions& options) {
    check_inputs(node, embeddings, graph);
    double weight_total = 0.0;
    const Vector partners = weighted_partner_sum(node, embeddings, graph, options, weight_total);
    const Vector& d = embeddings[node];
    if (options.summation) {
        Matrix c(d.size(), 1);
        for (std::size_t n = 0; n < d.size(); ++n) c(n, 0) = weight_total * d[n] + partners[n];
        return c;
    }
    // sum_j' s_jj' d_j d_j'^T collapses to the rank-1 product d_j m_j^T.
    return pattern_correlation(d, partners);
}

std::vector<Vector> correlation_backward(std::size_t node, std::span<const Vector> embeddings,
                                         const ViewGraph& graph, const Matrix& upstream,
                                         const CorrelationOptions& options) {
    check_inputs(node, embeddings, graph);
    const Vector& d = embeddings[node];
    const std::size_t n = d.size();
    const std::size_t cols = options.summation ? 1 : n;
    if (upstream.rows() != n || upstream.cols() != cols)
        throw InvalidArgument("correlation upstream gradient has the wrong shape");

    std::vector<Vector> grads(embeddings.size(), Vector(n, 0.0));
    double weight_total = 0.0;
    const Vector partners = weighted_partner_sum(node, embeddings, graph, options, weight_total);

    Vector partner_grad;
    if (options.summation) {
        partner_grad.assign(n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            grads[node][r] += weight_total * upstream(r, 0);
            partner_grad[r] = upstream(r, 0);
        }
    } else {
        grads[node] = matvec(upstream, partners);
        partner_grad = matvec_transposed(upstream, d);
    }
    for (std::size_t k = 0; k < embeddings.size(); ++k) {
        if (k == node && !options.include_self) continue;
        const double s = graph.similarity(node, k);
        for (std::size_t r = 0; r < n; ++r) grads[k][r] += s * partner_grad[r];
    }
    return grads;
}

}  // namespace viewgraph
