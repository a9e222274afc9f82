#ifndef MZSG_LINALG_HPP
#define MZSG_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "mzsg/errors.hpp"

namespace mzsg {

using Vec = std::vector<double>;

/// Dense square matrix, row-major. Dimensions stay small (the state
/// dimension d), so everything is done with plain loops and partial-pivot LU.
class Matrix {
public:
    Matrix() : n_(0) {}
    explicit Matrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

    static Matrix identity(int n) {
        Matrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    const std::vector<double>& data() const { return a_; }

    Vec apply(const Vec& x) const {
        Vec y(n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    /// A^T x
    Vec apply_transposed(const Vec& x) const {
        Vec y(n_, 0.0);
        for (int j = 0; j < n_; ++j) {
            double s = 0.0;
            for (int i = 0; i < n_; ++i) s += (*this)(i, j) * x[i];
            y[j] = s;
        }
        return y;
    }

    /// A A^T
    Matrix times_transpose() const {
        Matrix m(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                double s = 0.0;
                for (int k = 0; k < n_; ++k) s += (*this)(i, k) * (*this)(j, k);
                m(i, j) = s;
            }
        return m;
    }

private:
    int n_;
    std::vector<double> a_;
};

struct LuFactors {
    Matrix lu;
    std::vector<int> perm;
};

LuFactors lu_factor(const Matrix& a);
Vec lu_solve(const LuFactors& f, const Vec& b);
/// Solves A^T w = b from the factors of A.
Vec lu_solve_transposed(const LuFactors& f, const Vec& b);
Matrix invert(const Matrix& a);

double norm_1(const Matrix& a);
/// ||A||_1 * ||A^{-1}||_1; returns +inf when A is singular.
double condition_1(const Matrix& a);

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(const Vec& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace mzsg

#endif // MZSG_LINALG_HPP
