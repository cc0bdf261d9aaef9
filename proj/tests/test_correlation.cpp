#include <doctest.h>

#include <random>

#include "oracles/oracles.hpp"
#include "viewgraph/correlation.hpp"
#include "viewgraph/error.hpp"

using namespace viewgraph;

namespace {

Vector random_simplex(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.5);
    Vector z(n);
    for (double& v : z) v = g(rng);
    return softmax(z);
}

std::vector<Vec3> random_dirs(std::size_t v, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Vec3> out;
    for (std::size_t j = 0; j < v; ++j) {
        Vec3 d{g(rng), g(rng), g(rng)};
        const double n = norm(d);
        out.push_back({d[0] / n, d[1] / n, d[2] / n});
    }
    return out;
}

oracle::Mat to_nested(const Matrix& m) {
    oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
    return out;
}

}  // namespace

TEST_CASE("outer product of basis vectors") {
    const Vector e2{0, 1, 0, 0}, e3{0, 0, 1, 0};
    const Matrix c = pattern_correlation(e2, e3);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t k = 0; k < 4; ++k) CHECK(c(r, k) == (r == 1 && k == 2 ? 1.0 : 0.0));
}

TEST_CASE("uniform embeddings give 1/N^2 everywhere") {
    const Vector u(5, 0.2);
    const Matrix c = pattern_correlation(u, u);
    for (double v : c.flat()) CHECK(v == doctest::Approx(1.0 / 25.0));
}

TEST_CASE("2x2 pattern correlation arithmetic") {
    const Matrix c = pattern_correlation(Vector{0.5, 0.5}, Vector{0.25, 0.75});
    CHECK(c(0, 0) == 0.125);
    CHECK(c(0, 1) == 0.375);
    CHECK(c(1, 0) == 0.125);
    CHECK(c(1, 1) == 0.375);
    CHECK_THROWS_AS(pattern_correlation(Vector{1.0}, Vector{0.5, 0.5}), InvalidArgument);
}

TEST_CASE("single view correlates with itself") {
    const std::vector<Vector> d{{0.1, 0.6, 0.3}};
    const ViewGraph g({{0, 0, 1}}, 10.0);
    const Matrix c = cumulative_correlation(0, d, g);
    CHECK(c == pattern_correlation(d[0], d[0]));
}

TEST_CASE("sigma zero with uniform embeddings gives V/N^2") {
    const std::size_t v = 6, n = 4;
    const std::vector<Vector> d(v, Vector(n, 1.0 / n));
    const ViewGraph g(default_viewpoints(v), 0.0);
    for (std::size_t j = 0; j < v; ++j) {
        const Matrix c = cumulative_correlation(j, d, g);
        for (double x : c.flat()) CHECK(x == doctest::Approx(6.0 / 16.0).epsilon(1e-14));
    }
}

TEST_CASE("cumulative correlation matches the term-by-term sum") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t v = 1 + trial % 5, n = 2 + trial % 4;
        std::vector<Vector> d;
        for (std::size_t j = 0; j < v; ++j) d.push_back(random_simplex(n, rng));
        const ViewGraph g(random_dirs(v, rng), 3.0);
        const oracle::Mat s = to_nested(g.similarity());
        const std::vector<oracle::Vec> dv(d.begin(), d.end());
        for (bool self : {true, false}) {
            for (std::size_t j = 0; j < v; ++j) {
                const Matrix c = cumulative_correlation(j, d, g, {self, false});
                const oracle::Mat ref = oracle::cumulative_correlation(j, dv, s, self);
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = 0; b < n; ++b) CHECK(std::abs(c(a, b) - ref[a][b]) < 1e-14);
            }
        }
    }
}

TEST_CASE("mass and transpose symmetry") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t v = 2 + trial % 6, n = 2 + trial % 5;
        std::vector<Vector> d;
        for (std::size_t j = 0; j < v; ++j) d.push_back(random_simplex(n, rng));
        const ViewGraph g(random_dirs(v, rng), 10.0);
        for (std::size_t j = 0; j < v; ++j) {
            double weights = 0.0;
            for (std::size_t k = 0; k < v; ++k) weights += g.similarity(j, k);
            CHECK(std::abs(cumulative_correlation(j, d, g).sum() - weights) < 1e-8);
            CHECK(std::abs(pattern_correlation(d[j], d[(j + 1) % v]).sum() - 1.0) < 1e-9);
        }
        CHECK(pattern_correlation(d[0], d[1]) == pattern_correlation(d[1], d[0]).transposed());
    }
}

TEST_CASE("one-hot embeddings keep only co-occurring pattern pairs") {
    const std::vector<Vector> d{{1, 0, 0}, {0, 0, 1}, {1, 0, 0}};
    const ViewGraph g(default_viewpoints(3), 2.0);
    const Matrix c = cumulative_correlation(0, d, g);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            const bool present = a == 0 && (b == 0 || b == 2);
            CHECK((c(a, b) > 0.0) == present);
        }
}

TEST_CASE("summation variant") {
    const std::vector<Vector> d{{0.2, 0.8}, {0.6, 0.4}};
    const ViewGraph g({{0, 0, 1}, {0, 0, -1}}, 0.0);
    const Matrix c = cumulative_correlation(0, d, g, {true, true});
    REQUIRE(c.cols() == 1);
    CHECK(c(0, 0) == doctest::Approx(2 * 0.2 + 0.2 + 0.6));
    CHECK(c(1, 0) == doctest::Approx(2 * 0.8 + 0.8 + 0.4));
}

TEST_CASE("bad inputs are rejected") {
    const std::vector<Vector> d{{0.5, 0.5}, {0.5, 0.5}};
    const ViewGraph g(default_viewpoints(2), 1.0);
    CHECK_THROWS_AS(cumulative_correlation(2, d, g), InvalidArgument);
    const ViewGraph g3(default_viewpoints(3), 1.0);
    CHECK_THROWS_AS(cumulative_correlation(0, d, g3), InvalidArgument);
    const std::vector<Vector> ragged{{0.5, 0.5}, {1.0}};
    CHECK_THROWS_AS(cumulative_correlation(0, ragged, g), InvalidArgument);
    CHECK_THROWS_AS(correlation_backward(0, d, g, Matrix(3, 3)), InvalidArgument);
}

TEST_CASE("backward: zero upstream and the single-view closed form") {
    const std::vector<Vector> d{{0.1, 0.2, 0.7}};
    const ViewGraph g({{1, 0, 0}}, 10.0);
    for (const auto& grad : correlation_backward(0, d, g, Matrix(3, 3)))
        for (double v : grad) CHECK(v == 0.0);

    Matrix up(3, 3);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    for (double& v : up.flat()) v = n(rng);
    const auto grads = correlation_backward(0, d, g, up);
    Matrix sym = up;
    sym += up.transposed();
    const Vector expected = matvec(sym, d[0]);
    CHECK(max_abs_diff(grads[0], expected) < 1e-15);
}

TEST_CASE("backward matches central differences") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t v = 4, dim = 3;
        std::vector<Vector> d;
        for (std::size_t j = 0; j < v; ++j) d.push_back(random_simplex(dim, rng));
        const ViewGraph g(random_dirs(v, rng), 2.0);
        for (bool summation : {false, true}) {
            const CorrelationOptions opts{trial % 2 == 0, summation};
            const std::size_t node = static_cast<std::size_t>(trial) % v;
            Matrix up(dim, summation ? 1 : dim);
            for (double& x : up.flat()) x = n(rng);
            const auto grads = correlation_backward(node, d, g, up, opts);
            for (std::size_t k = 0; k < v; ++k) {
                auto loss = [&](const oracle::Vec& x) {
                    auto dd = d;
                    dd[k] = x;
                    return dot(cumulative_correlation(node, dd, g, opts).flat(), up.flat());
                };
                for (std::size_t i = 0; i < dim; ++i)
                    CHECK(oracle::relative_error(grads[k][i], oracle::central_difference(loss, d[k], i)) < 1e-6);
            }
        }
    }
}
