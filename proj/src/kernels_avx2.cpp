// AVX2 reduction variants. Compiled with -mavx2; only dispatched to when the
// CPU reports avx2 support. Lane accumulators are combined in a fixed order.

#if defined(__x86_64__)

#include <immintrin.h>

#include <cstddef>

namespace kahlerlab::kernels::detail {

namespace {
inline double hsum_ordered(__m256d acc) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    return ((lane[0] + lane[1]) + lane[2]) + lane[3];
}
}  // namespace

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double r = hsum_ordered(acc);
    for (; i < n; ++i) r += x[i];
    return r;
}

double dot_avx2(const double* w, const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i), acc);
    }
    double r = hsum_ordered(acc);
    for (; i < n; ++i) r += w[i] * x[i];
    return r;
}

double dot3_avx2(const double* w, const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), p, acc);
    }
    double r = hsum_ordered(acc);
    for (; i < n; ++i) r += w[i] * x[i] * y[i];
    return r;
}

}  // namespace kahlerlab::kernels::detail

#endif  // __x86_64__
