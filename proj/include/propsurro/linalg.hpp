#pragma once

#include <cmath>

#include "propsurro/common.hpp"

namespace propsurro {

// Lower-triangular Cholesky factor of an SPD matrix. Stores L row-major
// (contiguous row heads for the substitution dot products) plus L^T so the
// backward solve also walks contiguous memory.
struct CholeskyFactor {
    RowMat lower;
    RowMat upper;  // lower.transpose()
    int dim = 0;

    double log_det() const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += std::log(lower(i, i));
        return 2.0 * s;
    }

    // L x = b
    Vec solve_lower(const Vec& b) const {
        if (b.size() != dim) throw DimensionMismatch("solve_lower: rhs size");
        Vec x(dim);
        for (int i = 0; i < dim; ++i) {
            double s = b(i);
            if (i > 0) s -= lower.row(i).head(i).dot(x.head(i));
            x(i) = s / lower(i, i);
        }
        return x;
    }

    // L^T x = b
    Vec solve_upper(const Vec& b) const {
        if (b.size() != dim) throw DimensionMismatch("solve_upper: rhs size");
        Vec x(dim);
        for (int i = dim - 1; i >= 0; --i) {
            double s = b(i);
            int m = dim - i - 1;
            if (m > 0) s -= upper.row(i).tail(m).dot(x.tail(m));
            x(i) = s / upper(i, i);
        }
        return x;
    }

    // (L L^T) x = b
    Vec solve(const Vec& b) const { return solve_upper(solve_lower(b)); }

    // (L L^T) X = B, column block rhs
    Mat solve(const Mat& B) const {
        if (B.rows() != dim) throw DimensionMismatch("solve: rhs rows");
        Mat X = B;
        for (int i = 0; i < dim; ++i) {
            if (i > 0) X.row(i) -= lower.row(i).head(i) * X.topRows(i);
            X.row(i) /= lower(i, i);
        }
        for (int i = dim - 1; i >= 0; --i) {
            int m = dim - i - 1;
            if (m > 0) X.row(i) -= upper.row(i).tail(m) * X.bottomRows(m);
            X.row(i) /= upper(i, i);
        }
        return X;
    }

    Mat inverse() const {
        Mat eye = Mat::Identity(dim, dim);
        return solve(eye);
    }
};

// Factor A = L L^T. A must be symmetric; the first non-positive pivot aborts
// with its index so callers can escalate jitter.
inline CholeskyFactor cholesky(const Mat& A) {
    if (A.rows() != A.cols()) throw DimensionMismatch("cholesky: matrix not square");
    const int n = static_cast<int>(A.rows());
    CholeskyFactor f;
    f.dim = n;
    f.lower = RowMat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double d = A(j, j) - f.lower.row(j).head(j).squaredNorm();
        if (!(d > 0.0) || !std::isfinite(d)) throw NotPositiveDefinite(j);
        const double ljj = std::sqrt(d);
        f.lower(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = A(i, j);
            if (j > 0) s -= f.lower.row(i).head(j).dot(f.lower.row(j).head(j));
            f.lower(i, j) = s / ljj;
        }
    }
    f.upper = f.lower.transpose();
    return f;
}

}  // namespace propsurro
