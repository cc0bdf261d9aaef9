#include "viewgraph/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "viewgraph/error.hpp"

namespace viewgraph {
namespace {

std::vector<Vec3> normalized(std::vector<Vec3> pts) {
    for (auto& p : pts) {
        const double n = norm(p);
        for (double& c : p) c /= n;
    }
    std::sort(pts.begin(), pts.end());
    return pts;
}

std::vector<Vec3> tetrahedron() {
    return normalized({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}});
}

std::vector<Vec3> octahedron() {
    return normalized({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}});
}

std::vector<Vec3> cube() {
    std::vector<Vec3> pts;
    for (double x : {-1.0, 1.0})
        for (double y : {-1.0, 1.0})
            for (double z : {-1.0, 1.0}) pts.push_back({x, y, z});
    return normalized(std::move(pts));
}

std::vector<Vec3> icosahedron() {
    constexpr double phi = std::numbers::phi;
    std::vector<Vec3> pts;
    for (double a : {-1.0, 1.0})
        for (double b : {-phi, phi}) {
            pts.push_back({0, a, b});
            pts.push_back({a, b, 0});
            pts.push_back({b, 0, a});
        }
    return normalized(std::move(pts));
}

std::vector<Vec3> dodecahedron() {
    constexpr double phi = std::numbers::phi;
    constexpr double inv = 1.0 / phi;
    std::vector<Vec3> pts;
    for (double x : {-1.0, 1.0})
        for (double y : {-1.0, 1.0})
            for (double z : {-1.0, 1.0}) pts.push_back({x, y, z});
    for (double a : {-inv, inv})
        for (double b : {-phi, phi}) {
            pts.push_back({0, a, b});
            pts.push_back({a, b, 0});
            pts.push_back({b, 0, a});
        }
    return normalized(std::move(pts));
}

std::vector<Vec3> fibonacci_lattice(std::size_t views) {
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> pts;
    pts.reserve(views);
    for (std::size_t k = 0; k < views; ++k) {
        const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(views);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double angle = golden_angle * static_cast<double>(k);
        pts.push_back({r * std::cos(angle), r * std::sin(angle), z});
    }
    return normalized(std::move(pts));
}

}  // namespace

double norm(const Vec3& v) noexcept { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 checked_unit(const Vec3& v) {
    const double n = norm(v);
    if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitNormTolerance)
        throw InvalidArgument("direction is not unit length (norm " + std::to_string(n) + ")");
    if (std::abs(n - 1.0) <= 1e-12) return v;
    return {v[0] / n, v[1] / n, v[2] / n};
}

std::vector<Vec3> default_viewpoints(std::size_t views) {
    switch (views) {
        case 4: return tetrahedron();
        case 6: return octahedron();
        case 8: return cube();
        case 12: return icosahedron();
        case 20: return dodecahedron();
        default: break;
    }
    if (views < 2) throw InvalidArgument("at least two views are required");
    return fibonacci_lattice(views);
}

double edge_length(const Vec3& u, const Vec3& w) {
    const double nu = norm(u);
    const double nw = norm(w);
    if (std::abs(nu - 1.0) > kUnitNormTolerance || std::abs(nw - 1.0) > kUnitNormTolerance ||
        !std::isfinite(nu) || !std::isfinite(nw))
        throw InvalidArgument("edge_length expects unit directions");
    if (u == w) return 0.0;
    const double cosine = u[0] * w[0] + u[1] * w[1] + u[2] * w[2];
    return std::clamp(0.5 * (1.0 - cosine), 0.0, 1.0);
}

double spatial_similarity(double edge, double sigma) {
    if (!(edge >= 0.0 && edge <= 1.0))
        throw InvalidArgument("edge length must lie in [0, 1]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw InvalidArgument("sigma must be finite and non-negative");
    return std::exp(-sigma * edge);
}

ViewGraph::ViewGraph(std::vector<Vec3> directions, double sigma)
    : directions_(std::move(directions)), similarity_(directions_.size(), directions_.size()), sigma_(sigma) {
    if (directions_.empty()) throw InvalidArgument("view graph needs at least one view");
    for (auto& d : directions_) d = checked_unit(d);
    const std::size_t v = directions_.size();
    for (std::size_t j = 0; j < v; ++j) {
        similarity_(j, j) = spatial_similarity(0.0, sigma);
        for (std::size_t k = j + 1; k < v; ++k) {
            const double s = spatial_similarity(edge_length(directions_[j], directions_[k]), sigma);
            similarity_(j, k) = s;
            similarity_(k, j) = s;
        }
    }
}

ViewGraph build_view_graph(std::span<const Vec3> directions, double sigma) {
    return ViewGraph({directions.begin(), directions.end()}, sigma);
}

}  // namespace viewgraph
