#include "rndkit/matrix.hpp"

#include <cmath>

namespace rndkit {

static void check(bool ok, const char* what) {
    if (!ok) throw ShapeError(what);
}

Mat matmul(const Mat& A, const Mat& B) {
    check(A.cols == B.rows, "matmul: inner dimensions differ");
    Mat C(A.rows, B.cols);
    // i-k-j order keeps the inner loop contiguous over both B and C.
    for (int i = 0; i < A.rows; ++i) {
        double* ci = C.row(i);
        const double* ai = A.row(i);
        for (int k = 0; k < A.cols; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = B.row(k);
            for (int j = 0; j < B.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return C;
}

Mat matmul_nt(const Mat& A, const Mat& B) {
    check(A.cols == B.cols, "matmul_nt: inner dimensions differ");
    Mat C(A.rows, B.rows);
    for (int i = 0; i < A.rows; ++i) {
        const double* ai = A.row(i);
        double* ci = C.row(i);
        for (int j = 0; j < B.rows; ++j) {
            const double* bj = B.row(j);
            double s = 0.0;
            for (int k = 0; k < A.cols; ++k) s += ai[k] * bj[k];
            ci[j] = s;
        }
    }
    return C;
}

Mat matmul_tn(const Mat& A, const Mat& B) {
    check(A.rows == B.rows, "matmul_tn: inner dimensions differ");
    Mat C(A.cols, B.cols);
    for (int k = 0; k < A.rows; ++k) {
        const double* ak = A.row(k);
        const double* bk = B.row(k);
        for (int i = 0; i < A.cols; ++i) {
            const double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = C.row(i);
            for (int j = 0; j < B.cols; ++j) ci[j] += aki * bk[j];
        }
    }
    return C;
}

Mat transpose(const Mat& A) {
    Mat T(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
    return T;
}

void add_row_inplace(Mat& A, const Vec& b) {
    check(static_cast<size_t>(A.cols) == b.size(), "add_row_inplace: width mismatch");
    for (int i = 0; i < A.rows; ++i) {
        double* ai = A.row(i);
        for (int j = 0; j < A.cols; ++j) ai[j] += b[j];
    }
}

Vec col_sum(const Mat& A) {
    Vec s(A.cols, 0.0);
    for (int i = 0; i < A.rows; ++i) {
        const double* ai = A.row(i);
        for (int j = 0; j < A.cols; ++j) s[j] += ai[j];
    }
    return s;
}

double mean(const Vec& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(const Vec& v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

double stddev(const Vec& v) { return std::sqrt(variance(v)); }

Mat take_rows(const Mat& A, const std::vector<int>& rows) {
    Mat out(static_cast<int>(rows.size()), A.cols);
    for (size_t i = 0; i < rows.size(); ++i) {
        int r = rows[i];
        if (r < 0 || r >= A.rows) throw ShapeError("take_rows: row index out of range");
        const double* src = A.row(r);
        double* dst = out.row(static_cast<int>(i));
        for (int j = 0; j < A.cols; ++j) dst[j] = src[j];
    }
    return out;
}

}  // namespace rndkit
