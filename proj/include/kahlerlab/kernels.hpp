#pragma once

#include <cstddef>
#include <string_view>

// Reduction kernels for quadrature sums. Scalar reference implementations and
// an AVX2 variant selected once at startup; both use a fixed accumulation
// order so results are reproducible run-to-run on the same build.

namespace kahlerlab::kernels {

/// Sum of x[i].
double sum(const double* x, std::size_t n);

/// Sum of w[i] * x[i].
double dot(const double* w, const double* x, std::size_t n);

/// Sum of w[i] * x[i] * y[i].
double dot3(const double* w, const double* x, const double* y, std::size_t n);

/// Name of the active backend ("avx2" or "scalar").
std::string_view active_backend();

/// Force the scalar reference path (used by equivalence tests).
void force_scalar(bool on);

namespace detail {
double sum_scalar(const double* x, std::size_t n);
double dot_scalar(const double* w, const double* x, std::size_t n);
double dot3_scalar(const double* w, const double* x, const double* y, std::size_t n);
#if defined(__x86_64__)
double sum_avx2(const double* x, std::size_t n);
double dot_avx2(const double* w, const double* x, std::size_t n);
double dot3_avx2(const double* w, const double* x, const double* y, std::size_t n);
#endif
}  // namespace detail

}  // namespace kahlerlab::kernels
