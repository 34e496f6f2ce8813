#pragma once

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rndkit {

using Vec = std::vector<double>;

/// Thrown when operand dimensions do not line up.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when an operation is applied to an object in the wrong state
/// (frozen net, stale cache, uninitialized normalizer, ...).
struct InvalidStateError : std::runtime_error {
    explicit InvalidStateError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dense row-major matrix of doubles. Rows are samples throughout the library.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
    Vec row_vec(int i) const { return Vec(row(i), row(i) + cols); }

    size_t size() const { return a.size(); }
    bool empty() const { return a.empty(); }

    void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

/// C = A * B
Mat matmul(const Mat& A, const Mat& B);
/// C = A * B^T
Mat matmul_nt(const Mat& A, const Mat& B);
/// C = A^T * B
Mat matmul_tn(const Mat& A, const Mat& B);

Mat transpose(const Mat& A);

/// Per-row addition of a bias vector: A(i,:) += b.
void add_row_inplace(Mat& A, const Vec& b);

/// Column sums, length A.cols.
Vec col_sum(const Mat& A);

/// New matrix holding the given rows of A in order. Indices may repeat.
Mat take_rows(const Mat& A, const std::vector<int>& rows);

double mean(const Vec& v);
double variance(const Vec& v);  // population
double stddev(const Vec& v);

}  // namespace rndkit
