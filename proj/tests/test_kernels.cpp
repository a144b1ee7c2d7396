#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kahlerlab/kernels.hpp"

using namespace kahlerlab;

namespace {
std::vector<double> random_array(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = unif(rng);
    return v;
}
}  // namespace

TEST_CASE("dispatched kernels agree with the scalar reference") {
    for (std::size_t n : {0ul, 1ul, 3ul, 4ul, 7ul, 64ul, 1001ul}) {
        const auto w = random_array(n, 11);
        const auto x = random_array(n, 22);
        const auto y = random_array(n, 33);

        kernels::force_scalar(true);
        const double s0 = kernels::sum(x.data(), n);
        const double d0 = kernels::dot(w.data(), x.data(), n);
        const double t0 = kernels::dot3(w.data(), x.data(), y.data(), n);
        CHECK(kernels::active_backend() == "scalar");
        kernels::force_scalar(false);

        const double s1 = kernels::sum(x.data(), n);
        const double d1 = kernels::dot(w.data(), x.data(), n);
        const double t1 = kernels::dot3(w.data(), x.data(), y.data(), n);

        CHECK(s1 == doctest::Approx(s0).epsilon(1e-13));
        CHECK(d1 == doctest::Approx(d0).epsilon(1e-13));
        CHECK(t1 == doctest::Approx(t0).epsilon(1e-13));
    }
}

TEST_CASE("kernels are bitwise reproducible run-to-run") {
    const auto w = random_array(777, 5);
    const auto x = random_array(777, 6);
    const auto y = random_array(777, 7);
    const double a = kernels::dot3(w.data(), x.data(), y.data(), w.size());
    const double b = kernels::dot3(w.data(), x.data(), y.data(), w.size());
    CHECK(a == b);
    CHECK(kernels::sum(x.data(), x.size()) == kernels::sum(x.data(), x.size()));
}

TEST_CASE("kernel exact values on small inputs") {
    const double w[] = {1.0, 2.0, 3.0};
    const double x[] = {4.0, 5.0, 6.0};
    const double y[] = {1.0, -1.0, 2.0};
    CHECK(kernels::sum(x, 3) == 15.0);
    CHECK(kernels::dot(w, x, 3) == 32.0);
    CHECK(kernels::dot3(w, x, y, 3) == 30.0);  // 4 - 10 + 36
}
