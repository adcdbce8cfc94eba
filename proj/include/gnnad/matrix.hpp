// Dense row-major double matrix and the handful of operations the training
// stack needs. Deliberately minimal: shapes are checked, storage is flat,
// and matmul is a cache-friendly ikj loop (parallelized over rows when
// OpenMP is enabled; each output element is still a sequential dot product,
// so results are bit-stable regardless of thread count).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnnad {

class Matrix {
public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return Matrix();
        Matrix m(rows.size(), rows[0].size());
        for (size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_)
                throw std::invalid_argument("from_rows: ragged input");
            for (size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    size_t size() const { return data_.size(); }

    double& operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
    double operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(size_t i) { return data_.data() + i * cols_; }
    const double* row(size_t i) const { return data_.data() + i * cols_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(op) + ": shape mismatch (" +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: shape mismatch (" + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " times " +
                                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                                    ")");
    Matrix c(a.rows(), b.cols());
    const size_t n = a.rows(), k = a.cols(), m = b.cols();
    // Each c(i,j) is a sequential ascending-k dot product computed by exactly
    // one thread, so results are bit-identical for any thread count.
#pragma omp parallel for schedule(static) if (n * k * m > 1u << 16)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const size_t i = static_cast<size_t>(ii);
        double* __restrict__ ci = c.row(i);
        const double* __restrict__ ai = a.row(i);
        for (size_t kk = 0; kk < k; ++kk) {
            const double aik = ai[kk];
            const double* __restrict__ bk = b.row(kk);
            for (size_t j = 0; j < m; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    Matrix c = a;
    for (size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

inline void add_inplace(Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add_inplace");
    for (size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

inline Matrix scale(const Matrix& a, double s) {
    Matrix c = a;
    for (size_t i = 0; i < c.size(); ++i) c.data()[i] *= s;
    return c;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "hadamard");
    Matrix c = a;
    for (size_t i = 0; i < c.size(); ++i) c.data()[i] *= b.data()[i];
    return c;
}

inline Matrix relu(const Matrix& a) {
    Matrix c = a;
    for (size_t i = 0; i < c.size(); ++i)
        if (c.data()[i] < 0.0) c.data()[i] = 0.0;
    return c;
}

/// Gradient of relu: passes `upstream` where the forward input was > 0.
/// The subgradient at exactly 0 is taken as 0.
inline Matrix relu_backward(const Matrix& input, const Matrix& upstream) {
    check_same_shape(input, upstream, "relu_backward");
    Matrix g = upstream;
    for (size_t i = 0; i < g.size(); ++i)
        if (input.data()[i] <= 0.0) g.data()[i] = 0.0;
    return g;
}

}  // namespace gnnad
