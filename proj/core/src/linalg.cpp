#include "mzsg/linalg.hpp"

#include <cmath>
#include <limits>

namespace mzsg {

LuFactors lu_factor(const Matrix& a) {
    const int n = a.dim();
    LuFactors f{a, std::vector<int>(n)};
    for (int i = 0; i < n; ++i) f.perm[i] = i;

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(f.lu(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::fabs(f.lu(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (!(best > 0.0) || !std::isfinite(best))
            throw NumericsError("lu_factor: singular or non-finite matrix");
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(f.lu(col, j), f.lu(pivot, j));
            std::swap(f.perm[col], f.perm[pivot]);
        }
        const double d = f.lu(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double m = f.lu(r, col) / d;
            f.lu(r, col) = m;
            for (int j = col + 1; j < n; ++j) f.lu(r, j) -= m * f.lu(col, j);
        }
    }
    return f;
}

Vec lu_solve(const LuFactors& f, const Vec& b) {
    const int n = f.lu.dim();
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        double s = b[f.perm[i]];
        for (int j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
        y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * y[j];
        y[i] = s / f.lu(i, i);
    }
    return y;
}

Vec lu_solve_transposed(const LuFactors& f, const Vec& b) {
    // A = P^T L U, so A^T w = b becomes U^T t = b, L^T s = t, w = P^T s.
    const int n = f.lu.dim();
    Vec t(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int j = 0; j < i; ++j) s -= f.lu(j, i) * t[j];
        t[i] = s / f.lu(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = t[i];
        for (int j = i + 1; j < n; ++j) s -= f.lu(j, i) * t[j];
        t[i] = s;
    }
    Vec w(n);
    for (int i = 0; i < n; ++i) w[f.perm[i]] = t[i];
    return w;
}

Matrix invert(const Matrix& a) {
    const int n = a.dim();
    const LuFactors f = lu_factor(a);
    Matrix inv(n);
    Vec e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vec col = lu_solve(f, e);
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    return inv;
}

double norm_1(const Matrix& a) {
    const int n = a.dim();
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::fabs(a(i, j));
        best = std::max(best, s);
    }
    return best;
}

double condition_1(const Matrix& a) {
    try {
        const Matrix inv = invert(a);
        return norm_1(a) * norm_1(inv);
    } catch (const NumericsError&) {
        return std::numeric_limits<double>::infinity();
    }
}

} // namespace mzsg
