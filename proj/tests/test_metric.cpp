#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/metric.hpp"

using namespace kahlerlab;

namespace {

// central-difference derivatives of a scalar callable
template <typename F>
double fd1(F&& f, Vec x, int a, double h = 1e-5) {
    Vec xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    return (f(xp) - f(xm)) / (2.0 * h);
}

template <typename F>
double fd2(F&& f, Vec x, int a, int b, double h = 1e-4) {
    if (a == b) {
        Vec xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        return (f(xp) - 2.0 * f(x) + f(xm)) / (h * h);
    }
    Vec pp = x, pm = x, mp = x, mm = x;
    pp[a] += h;
    pp[b] += h;
    pm[a] += h;
    pm[b] -= h;
    mp[a] -= h;
    mp[b] += h;
    mm[a] -= h;
    mm[b] -= h;
    return (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
}

std::vector<Vec> probe_points(const ManifoldModel& m) {
    // interior points with a healthy margin so FD stencils stay inside
    std::vector<Vec> pts;
    const Vec c = m.polytope.barycenter();
    for (const Vec& v : m.polytope.vertices) {
        pts.push_back(Vec{c[0] + 0.55 * (v[0] - c[0]), c[1] + 0.55 * (v[1] - c[1])});
    }
    pts.push_back(c);
    return pts;
}

}  // namespace

TEST_CASE("Poly2 jets agree with finite differences") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int dim : {1, 2}) {
        Poly2 p(dim, 4);
        for (int i = 0; i <= 4; ++i)
            for (int j = 0; i + j <= 4 && j <= (dim == 1 ? 0 : 4); ++j) p.coeff(i, j) = unif(rng);
        const Vec x{0.37, dim == 2 ? -0.21 : 0.0};
        const Jet J = p.jet(x);
        auto f = [&](Vec y) { return p.value(y); };
        CHECK(J.val == doctest::Approx(p.value(x)).epsilon(1e-14));
        for (int a = 0; a < dim; ++a)
            CHECK(J.g[a] == doctest::Approx(fd1(f, x, a)).epsilon(1e-8).scale(1.0));
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
                CHECK(J.h[a * 2 + b] == doctest::Approx(fd2(f, x, a, b)).epsilon(1e-5).scale(1.0));
        // third order: FD of the analytic gradient
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
                for (int c = 0; c < dim; ++c) {
                    auto ga = [&](Vec y) { return p.jet(y).g[a]; };
                    CHECK(J.t3[(a * 2 + b) * 2 + c] ==
                          doctest::Approx(fd2(ga, x, b, c)).epsilon(1e-5).scale(1.0));
                }
    }
}

TEST_CASE("boundary bump psi vanishes on every facet") {
    for (ModelName name : {ModelName::CP1, ModelName::Hirzebruch1}) {
        const Polytope p = build_model(name);
        std::vector<double> coeffs(p.dim == 1 ? 3 : 6, 0.3);
        const Poly2 psi = Poly2::boundary_bump(p, coeffs);
        for (const Vec& v : p.vertices) CHECK(psi.value(v) == doctest::Approx(0.0).scale(1.0));
        // midpoints of edges lie on a facet too
        const std::size_t nv = p.vertices.size();
        if (p.dim == 2) {
            for (std::size_t i = 0; i < nv; ++i) {
                const Vec& a = p.vertices[i];
                const Vec& b = p.vertices[(i + 1) % nv];
                const Vec mid{(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0};
                CHECK(psi.value(mid) == doctest::Approx(0.0).scale(1.0));
            }
        }
    }
}

TEST_CASE("symplectic potential jets agree with finite differences") {
    for (ModelName name : {ModelName::CP1, ModelName::Hirzebruch1}) {
        auto model = make_model(name, 12);
        for (const SymplecticPotential& u : random_catalog_metrics(model, 2, 99)) {
            auto f = [&](Vec y) { return u.value(y); };
            for (const Vec& x : probe_points(*model)) {
                const Jet J = u.jet(x);
                CHECK(J.val == doctest::Approx(u.value(x)).epsilon(1e-13));
                for (int a = 0; a < model->n; ++a)
                    CHECK(J.g[a] == doctest::Approx(fd1(f, x, a)).epsilon(1e-7).scale(1.0));
                for (int a = 0; a < model->n; ++a)
                    for (int b = 0; b < model->n; ++b) {
                        CHECK(J.h[a * 2 + b] ==
                              doctest::Approx(fd2(f, x, a, b)).epsilon(1e-4).scale(1.0));
                        auto gab = [&](Vec y) { return u.jet(y).h[a * 2 + b]; };
                        for (int c = 0; c < model->n; ++c) {
                            CHECK(J.t3[(a * 2 + b) * 2 + c] ==
                                  doctest::Approx(fd1(gab, x, c)).epsilon(1e-6).scale(1.0));
                            for (int d = 0; d < model->n; ++d)
                                CHECK(J.t4[((a * 2 + b) * 2 + c) * 2 + d] ==
                                      doctest::Approx(fd2(gab, x, c, d)).epsilon(1e-4).scale(1.0));
                        }
                    }
            }
        }
    }
}

TEST_CASE("round metric on the interval calibrates exactly") {
    auto model = make_model(ModelName::CP1, 64);
    SymplecticPotential u(model);
    u.require_valid();

    for (const Vec& x : model->quad.nodes)
        CHECK(ricci_h0_value(u, x) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    const RicciPotential r = ricci_potential(u);
    CHECK(r.sup_abs() < 1e-12);
    CHECK(r.c == doctest::Approx(-std::log(2.0)).epsilon(1e-12));

    // normalization holds by construction
    CHECK(model->quad.integrate(r.eh) == doctest::Approx(model->vol).epsilon(1e-13));
}

TEST_CASE("Ricci potential derivatives match finite differences") {
    for (ModelName name : {ModelName::CP1, ModelName::Hirzebruch1}) {
        auto model = make_model(name, 12);
        for (const SymplecticPotential& u : random_catalog_metrics(model, 2, 7)) {
            auto h0 = [&](Vec y) { return ricci_h0_value(u, y); };
            for (const Vec& x : probe_points(*model)) {
                const Vec g = ricci_h_grad(u, x);
                for (int a = 0; a < model->n; ++a)
                    CHECK(g[a] == doctest::Approx(fd1(h0, x, a)).epsilon(1e-6).scale(1.0));

                // divergence-form Laplacian against an all-FD route
                const Jet J = u.jet(x);
                const Mat U = inverse(J.h, model->n);
                double lap_fd = 0.0;
                for (int a = 0; a < model->n; ++a)
                    for (int b = 0; b < model->n; ++b)
                        lap_fd += U[a * 2 + b] * fd2(h0, x, a, b);
                for (int b = 0; b < model->n; ++b) {
                    for (int a = 0; a < model->n; ++a) {
                        auto Uab = [&](Vec y) {
                            return inverse(u.jet(y).h, u.model().n)[a * 2 + b];
                        };
                        lap_fd += fd1(Uab, x, a) * fd1(h0, x, b);
                    }
                }
                CHECK(ricci_h_laplacian(u, x) ==
                      doctest::Approx(lap_fd).epsilon(1e-4).scale(1.0));
            }
        }
    }
}

TEST_CASE("hinge direction profile is a C2 convex fillet") {
    const double delta = 1e-2;
    const HingeDirection hinge{Vec{1.0, 0.0}, 0.0, delta};
    auto val = [&](double s) { return direction_value(Direction{hinge}, Vec{s, 0.0}, 1); };

    CHECK(val(-2.0 * delta) == 0.0);
    CHECK(val(0.5) == 0.5);
    CHECK(val(delta) == doctest::Approx(delta).epsilon(1e-14));
    CHECK(val(-delta) == doctest::Approx(0.0).scale(1.0));

    for (double s : {-delta, -0.3 * delta, 0.0, 0.6 * delta, delta}) {
        const Jet J = direction_jet(Direction{hinge}, Vec{s, 0.0}, 1);
        CHECK(J.h[0] >= 0.0);
        auto f = [&](Vec y) { return val(y[0]); };
        CHECK(J.g[0] == doctest::Approx(fd1(f, Vec{s, 0.0}, 0, 1e-6)).epsilon(1e-4).scale(1.0));
    }
    // slope continuity across the fillet ends
    const Jet lo = direction_jet(Direction{hinge}, Vec{-delta - 1e-12, 0.0}, 1);
    const Jet hi = direction_jet(Direction{hinge}, Vec{delta + 1e-12, 0.0}, 1);
    CHECK(lo.g[0] == doctest::Approx(0.0).scale(1.0));
    CHECK(hi.g[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Legendre dual of the round interval metric is 2 log cosh(y/2)") {
    auto model = make_model(ModelName::CP1, 24);
    SymplecticPotential u(model);
    const ComplexPotential f = legendre_dual(u, 10.0, 129);

    CHECK(f.eval(0.0) == doctest::Approx(0.0).scale(1.0));
    for (double y : {-10.0, -3.3, -0.5, 0.0, 1.0, 7.25, 10.0}) {
        const double want = 2.0 * std::log(std::cosh(y / 2.0));
        CHECK(f.eval(y) == doctest::Approx(want).epsilon(1e-11).scale(1.0));
        CHECK(f.eval_slope(y) == doctest::Approx(std::tanh(y / 2.0)).epsilon(1e-11).scale(1.0));
    }
    CHECK(f.slope_lo == doctest::Approx(std::tanh(-5.0)).epsilon(1e-11));
    CHECK(f.slope_hi == doctest::Approx(std::tanh(5.0)).epsilon(1e-11));
    CHECK(f.grid.size() == 129);
    CHECK(f.values[64] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("Legendre roundtrip recovers the symplectic potential") {
    auto model = make_model(ModelName::CP1, 24);
    for (const SymplecticPotential& u : random_catalog_metrics(model, 3, 123)) {
        const ComplexPotential f = legendre_dual(u, 10.0, 65);
        for (double x : {-0.9, -0.4, 0.0, 0.33, 0.8}) {
            CHECK(dual_back(f, x) == doctest::Approx(u.value(Vec{x, 0.0})).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("random metric catalog is seeded and valid") {
    for (ModelName name : {ModelName::CP1, ModelName::Hirzebruch1}) {
        auto model = make_model(name, 12);
        const auto a = random_catalog_metrics(model, 4, 2024);
        const auto b = random_catalog_metrics(model, 4, 2024);
        REQUIRE(a.size() == 4);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].hessian_margin() > 0.0);
            CHECK(a[i].psi().value(model->polytope.barycenter()) ==
                  b[i].psi().value(model->polytope.barycenter()));
        }
    }
}

TEST_CASE("degenerate directions are rejected") {
    auto model = make_model(ModelName::CP1, 12);
    SymplecticPotential u(model);
    // large concave perturbation destroys positivity
    Poly2 bad(1, 2);
    bad.coeff(2, 0) = -10.0;
    const SymplecticPotential v = u.with_direction(Direction{PolyDirection{bad}}, 1.0);
    CHECK_THROWS_AS(v.require_valid(), DegenerateMetricError);
    CHECK_THROWS_AS((void)u.value(Vec{1.5, 0.0}), DegenerateMetricError);
}
