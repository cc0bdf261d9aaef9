#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "viewgraph/geometry.hpp"
#include "viewgraph/tensor.hpp"

namespace viewgraph {

struct CorrelationOptions {
    /// Include the j' = j term in the cumulative sum (weight s_jj = 1).
    bool include_self = true;
    /// Replace the outer product d_j d_j'^T by the sum d_j + d_j' (N x 1 result).
    bool summation = false;
};

/// Outer product d_j^T d_j' (N x N). Entry (n, n') couples pattern n of the
/// first view with pattern n' of the second.
Matrix pattern_correlation(std::span<const double> first, std::span<const double> second);

/// Spatially weighted sum of the pattern correlations rooted at node j:
/// C_j = sum_j' s_jj' c_jj'.
Matrix cumulative_correlation(std::size_t node, std::span<const Vector> embeddings, const ViewGraph& graph,
                              const CorrelationOptions& options = {});

/// Gradients of a loss w.r.t. every embedding given dL/dC_j.
std::vector<Vector> correlation_backward(std::size_t node, std::span<const Vector> embeddings,
                                         const ViewGraph& graph, const Matrix& upstream,
                                         const CorrelationOptions& options = {});

}  // namespace viewgraph
