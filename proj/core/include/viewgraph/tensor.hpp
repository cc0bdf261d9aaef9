#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace viewgraph {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> flat() noexcept { return data_; }
    std::span<const double> flat() const noexcept { return data_; }

    void fill(double v);
    double sum() const noexcept;
    Matrix transposed() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator*=(double s) noexcept;

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);

/// y = A x
Vector matvec(const Matrix& a, std::span<const double> x);

/// y = A^T x
Vector matvec_transposed(const Matrix& a, std::span<const double> x);

/// A += scale * u v^T
void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v, double scale = 1.0);

/// Numerically stable softmax (max-logit subtraction).
Vector softmax(std::span<const double> logits);

/// Backprop through softmax: returns J^T g for p = softmax(z).
Vector softmax_backward(std::span<const double> p, std::span<const double> upstream);

double max_abs_diff(std::span<const double> a, std::span<const double> b);
double frobenius_norm(const Matrix& m);
bool all_finite(std::span<const double> v);

}  // namespace viewgraph
