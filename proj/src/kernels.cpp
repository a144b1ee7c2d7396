#include "kahlerlab/kernels.hpp"

#include <atomic>

namespace kahlerlab::kernels {

namespace detail {

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot_scalar(const double* w, const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i];
    return acc;
}

double dot3_scalar(const double* w, const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i];
    return acc;
}

}  // namespace detail

namespace {

struct Backend {
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*dot3)(const double*, const double*, const double*, std::size_t);
    std::string_view name;
};

constexpr Backend kScalar{detail::sum_scalar, detail::dot_scalar, detail::dot3_scalar, "scalar"};

Backend pick_backend() {
#if defined(__x86_64__) && defined(KAHLERLAB_BUILD_AVX2)
    if (__builtin_cpu_supports("avx2")) {
        return Backend{detail::sum_avx2, detail::dot_avx2, detail::dot3_avx2, "avx2"};
    }
#endif
    return kScalar;
}

const Backend& dispatched() {
    static const Backend b = pick_backend();
    return b;
}

std::atomic<bool> g_force_scalar{false};

const Backend& active() { return g_force_scalar.load(std::memory_order_relaxed) ? kScalar : dispatched(); }

}  // namespace

double sum(const double* x, std::size_t n) { return active().sum(x, n); }
double dot(const double* w, const double* x, std::size_t n) { return active().dot(w, x, n); }
double dot3(const double* w, const double* x, const double* y, std::size_t n) {
    return active().dot3(w, x, y, n);
}

std::string_view active_backend() { return active().name; }
void force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }

}  // namespace kahlerlab::kernels
