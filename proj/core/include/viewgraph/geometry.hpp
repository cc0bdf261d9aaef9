#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "viewgraph/tensor.hpp"

namespace viewgraph {

using Vec3 = std::array<double, 3>;

/// Tolerance on |‖u‖ - 1| accepted for view directions.
inline constexpr double kUnitNormTolerance = 1e-6;

double norm(const Vec3& v) noexcept;

/// Returns v / ‖v‖ if ‖v‖ is within kUnitNormTolerance of 1, throws otherwise.
Vec3 checked_unit(const Vec3& v);

/// Camera directions for V views on the unit sphere.
///
/// V in {4, 6, 8, 12, 20} yields the vertices of the tetrahedron, octahedron,
/// cube, icosahedron and dodecahedron respectively. Any other V >= 2 falls back
/// to a Fibonacci spiral lattice. Output is sorted lexicographically.
std::vector<Vec3> default_viewpoints(std::size_t views);

/// Normalized arc length 0.5 * (1 - cos θ) between two unit directions, in [0, 1].
double edge_length(const Vec3& u, const Vec3& w);

/// exp(-sigma * edge); edge must lie in [0, 1] and sigma must be >= 0.
double spatial_similarity(double edge, double sigma);

/// Fully connected view graph of one shape: directions plus their V x V
/// spatial similarities. Immutable once built.
class ViewGraph {
public:
    ViewGraph(std::vector<Vec3> directions, double sigma);

    std::size_t size() const noexcept { return directions_.size(); }
    const std::vector<Vec3>& directions() const noexcept { return directions_; }
    const Matrix& similarity() const noexcept { return similarity_; }
    double similarity(std::size_t j, std::size_t k) const noexcept { return similarity_(j, k); }
    double sigma() const noexcept { return sigma_; }

private:
    std::vector<Vec3> directions_;
    Matrix similarity_;
    double sigma_;
};

ViewGraph build_view_graph(std::span<const Vec3> directions, double sigma);

}  // namespace viewgraph
