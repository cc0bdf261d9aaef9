#include "viewgraph/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "viewgraph/error.hpp"

namespace viewgraph {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Matrix::sum() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (!same_shape(other)) throw InvalidArgument("matrix shape mismatch in +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw InvalidArgument("matvec: dimension mismatch");
    Vector y(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x);
    return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
    if (a.rows() != x.size()) throw InvalidArgument("matvec_transposed: dimension mismatch");
    Vector y(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        auto row = a.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) y[c] += row[c] * xr;
    }
    return y;
}

void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v, double scale) {
    if (a.rows() != u.size() || a.cols() != v.size())
        throw InvalidArgument("add_outer: dimension mismatch");
    for (std::size_t r = 0; r < u.size(); ++r) {
        const double ur = scale * u[r];
        if (ur == 0.0) continue;
        auto row = a.row(r);
        for (std::size_t c = 0; c < v.size(); ++c) row[c] += ur * v[c];
    }
}

Vector softmax(std::span<const double> logits) {
    if (logits.empty()) throw InvalidArgument("softmax of empty vector");
    const double m = *std::max_element(logits.begin(), logits.end());
    Vector p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

Vector softmax_backward(std::span<const double> p, std::span<const double> upstream) {
    const double inner = dot(p, upstream);
    Vector g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = p[i] * (upstream[i] - inner);
    return g;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("max_abs_diff: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.flat()) s += v * v;
    return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace viewgraph
