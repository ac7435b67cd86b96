#pragma once

#include <array>
#include <cmath>
#include <optional>

namespace tacnog {

using Vec3 = std::array<double, 3>;

/// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> a{};

    double& operator()(int r, int c) { return a[3 * r + c]; }
    double operator()(int r, int c) const { return a[3 * r + c]; }
};

inline double det(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

inline double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

/// Solves m·x = b by Gaussian elimination with partial pivoting.
/// Returns nullopt when a pivot falls below `pivot_tol` times the largest entry.
inline std::optional<Vec3> solve(Mat3 m, Vec3 b, double pivot_tol = 1e-14) {
    double scale = 0.0;
    for (double v : m.a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0 || !std::isfinite(scale)) return std::nullopt;

    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        if (std::abs(m(piv, col)) <= pivot_tol * scale) return std::nullopt;
        if (piv != col) {
            for (int c = 0; c < 3; ++c) std::swap(m(col, c), m(piv, c));
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < 3; ++r) {
            const double f = m(r, col) / m(col, col);
            for (int c = col; c < 3; ++c) m(r, c) -= f * m(col, c);
            b[r] -= f * b[col];
        }
    }
    Vec3 x{};
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= m(r, c) * x[c];
        x[r] = s / m(r, r);
    }
    return x;
}

}  // namespace tacnog
