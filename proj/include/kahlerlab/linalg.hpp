#pragma once

#include <array>
#include <cmath>

// Tiny dimension-aware (dim <= 2) dense containers used throughout. A Vec/Mat
// always has storage for 2 components; entries beyond `dim` are kept at zero.

namespace kahlerlab {

using Vec = std::array<double, 2>;
using Mat = std::array<double, 4>;    // row-major, m[i*2+j]
using Ten3 = std::array<double, 8>;   // t[(i*2+j)*2+k]
using Ten4 = std::array<double, 16>;  // f[((i*2+j)*2+k)*2+l]

inline constexpr Vec kZeroVec{0.0, 0.0};

inline double dot(const Vec& a, const Vec& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

inline Vec matvec(const Mat& m, const Vec& v, int dim) {
    Vec r{0.0, 0.0};
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r[i] += m[i * 2 + j] * v[j];
    return r;
}

inline double det(const Mat& m, int dim) {
    return dim == 1 ? m[0] : m[0] * m[3] - m[1] * m[2];
}

inline Mat inverse(const Mat& m, int dim) {
    Mat r{0.0, 0.0, 0.0, 0.0};
    if (dim == 1) {
        r[0] = 1.0 / m[0];
    } else {
        const double d = det(m, 2);
        r[0] = m[3] / d;
        r[1] = -m[1] / d;
        r[2] = -m[2] / d;
        r[3] = m[0] / d;
    }
    return r;
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Mat& m, int dim) {
    if (dim == 1) return m[0];
    const double tr = m[0] + m[3];
    const double d = det(m, 2);
    const double disc = std::sqrt(std::fmax(tr * tr / 4.0 - d, 0.0));
    return tr / 2.0 - disc;
}

/// Solve m x = b for a symmetric positive definite m.
inline Vec solve(const Mat& m, const Vec& b, int dim) {
    return matvec(inverse(m, dim), b, dim);
}

inline double norm_inf(const Vec& v, int dim) {
    double r = 0.0;
    for (int i = 0; i < dim; ++i) r = std::fmax(r, std::fabs(v[i]));
    return r;
}

}  // namespace kahlerlab
