#include <doctest.h>

#include <cmath>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/functionals.hpp"
#include "kahlerlab/geodesic.hpp"

using namespace kahlerlab;

namespace {

// exact toric geodesic between path.at(0) and path.at(T), evaluated at (t, y)
double exact_geodesic_value(const GeodesicPath& path, double t, double y) {
    const SymplecticPotential u_t = path.at(t);
    const double x = legendre_argmax(u_t, y);
    return x * y - u_t.value(Vec{x, 0.0});
}

}  // namespace

TEST_CASE("Legendre identity: d f_t / dt at fixed y equals -v") {
    auto model = make_model(ModelName::CP1);
    const SymplecticPotential base(model);
    for (const RaySpec& ray : default_ray_catalog(model)) {
        const GeodesicPath p = make_geodesic(base, ray.v);
        const double d = 1e-4;
        for (double y : {-3.0, -0.7, 0.0, 1.9}) {
            const double fd =
                (exact_geodesic_value(p, d, y) - exact_geodesic_value(p, -d, y)) / (2.0 * d);
            const double x = legendre_argmax(base, y);
            CHECK(fd == doctest::Approx(-p.v_value(Vec{x, 0.0})).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("H(t) monotone along catalog geodesics") {
    for (ModelName name : {ModelName::CP1, ModelName::Hirzebruch1}) {
        auto model = make_model(name);
        const SymplecticPotential base(model);
        for (const RaySpec& ray : default_ray_catalog(model)) {
            const GeodesicPath p = make_geodesic(base, ray.v);
            double prev = -1e300;
            for (double t : {0.0, 1.0, 2.0, 4.0}) {
                const double h = h_of_t(p, t);
                CHECK(h >= prev - 1e-8 * model->V);
                prev = h;
            }
        }
    }
}

TEST_CASE("affine rays: H(t) is the metric-independent H(xi) and bounds the functional") {
    auto model = make_model(ModelName::Hirzebruch1);
    const SymplecticPotential base(model);
    const TorusVector xi = make_torus_vector(*model, Vec{0.0, 1.0});
    AffineDirection aff{Vec{-xi.xi[0], -xi.xi[1]}, -xi.c};
    const GeodesicPath p = make_geodesic(base, Direction{aff});
    const double target = h_invariant(base, xi);
    for (double t : {0.0, 1.0, 3.0}) {
        CHECK(h_of_t(p, t) == doctest::Approx(target).epsilon(1e-8).scale(model->V));
        CHECK(h_functional(p.at(t)) >= h_of_t(p, t) - 1e-8 * model->V);
    }
}

TEST_CASE("dH/dt identity matches the Richardson slope and is nonnegative") {
    auto model = make_model(ModelName::CP1);
    const SymplecticPotential base(model);

    const GeodesicPath still = make_geodesic(base, Direction{AffineDirection{{0.0, 0.0}, 0.0}});
    const DhDtIdentity z = dh_dt_identity(still, 1.0);
    CHECK(z.fd_slope == doctest::Approx(0.0).scale(1.0));
    CHECK(z.rhs == doctest::Approx(0.0).scale(1.0));

    for (const RaySpec& ray : default_ray_catalog(model)) {
        const GeodesicPath p = make_geodesic(base, ray.v);
        const DhDtIdentity d = dh_dt_identity(p, 1.0);
        CHECK(std::fabs(d.fd_slope - d.rhs) <
              1e-4 * std::fmax(std::fabs(d.rhs), model->V * 1e-6));
        CHECK(d.rhs >= -1e-8 * model->V);
    }
}

TEST_CASE("geodesic construction rejects degenerating directions") {
    auto model = make_model(ModelName::CP1);
    Poly2 bad(1, 2);
    bad.coeff(2, 0) = -2.0;
    CHECK_THROWS_AS(make_geodesic(SymplecticPotential(model), Direction{PolyDirection{bad}}),
                    DegenerateMetricError);
}

TEST_CASE("eps-geodesic: stationary segment converges to the endpoint") {
    auto model = make_model(ModelName::CP1);
    const SymplecticPotential base(model);
    const ComplexPotential f = legendre_dual(base, 6.0, 65);
    const SymplecticPotential uref(model);
    const ComplexPotential fref = legendre_dual(uref, 6.0, 65);

    EpsGeodesicProblem prob;
    prob.f0 = f;
    prob.f1 = f;
    prob.T = 1.0;
    prob.nt = 9;
    prob.ref.resize(fref.grid.size());
    for (std::size_t j = 0; j < fref.grid.size(); ++j) {
        const double x = legendre_argmax(uref, fref.grid[j]);
        prob.ref[j] = 1.0 / uref.jet(Vec{x, 0.0}).h[0];  // f_ref''
    }

    double prev = 1e300;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        prob.epsilon = eps;
        const EpsGeodesicSolution sol = eps_geodesic_solve(prob);
        CHECK(sol.residual < 1e-8);
        double err = 0.0;
        for (int i = 0; i < sol.nt; ++i)
            for (int j = 0; j < sol.ny; ++j)
                err = std::fmax(err, std::fabs(sol.F[i * sol.ny + j] - f.values[j]));
        CHECK(err < prev);
        prev = err;
    }

    prob.epsilon = 0.0;
    CHECK_THROWS_AS(eps_geodesic_solve(prob), std::invalid_argument);
}

TEST_CASE("eps-geodesic converges to the exact toric geodesic with order >= 0.8") {
    auto model = make_model(ModelName::CP1);
    const SymplecticPotential base(model);
    // wide fillet keeps the truncation floor below the smallest epsilon term
    HingeDirection hinge{Vec{1.0, 0.0}, 0.0, 0.1};
    const GeodesicPath path = make_geodesic(base, Direction{hinge});

    const double L = 6.0, T = 1.0;
    const int ny = 321, nt = 65;
    const ComplexPotential f0 = legendre_dual(path.at(0.0), L, ny);
    const ComplexPotential f1 = legendre_dual(path.at(T), L, ny);

    EpsGeodesicProblem prob;
    prob.f0 = f0;
    prob.f1 = f1;
    prob.T = T;
    prob.nt = nt;
    prob.ref.resize(f0.grid.size());
    for (std::size_t j = 0; j < f0.grid.size(); ++j) {
        const double x = legendre_argmax(base, f0.grid[j]);
        prob.ref[j] = 1.0 / base.jet(Vec{x, 0.0}).h[0];
    }

    // Neumann rows and the coarsest-eps warm start come from the exact geodesic
    prob.slope_lo.resize(nt);
    prob.slope_hi.resize(nt);
    std::vector<double> exact(static_cast<std::size_t>(nt) * ny);
    for (int i = 0; i < nt; ++i) {
        const double t = T * i / (nt - 1);
        prob.slope_lo[i] = legendre_argmax(path.at(t), -L);
        prob.slope_hi[i] = legendre_argmax(path.at(t), L);
        for (int j = 0; j < ny; ++j)
            exact[i * ny + j] = exact_geodesic_value(path, t, f0.grid[j]);
    }
    prob.init = exact;

    std::vector<double> errs;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        prob.epsilon = eps;
        const EpsGeodesicSolution sol = eps_geodesic_solve(prob);
        CHECK(sol.residual < 1e-8);
        double err = 0.0;
        for (std::size_t k = 0; k < exact.size(); ++k)
            err = std::fmax(err, std::fabs(sol.F[k] - exact[k]));
        errs.push_back(err);
        prob.init = sol.F;  // continuation
    }
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
    const double slope = std::log10(errs[0] / errs[2]) / 2.0;
    CHECK(slope >= 0.8);
}

TEST_CASE("stability probes issue the expected on-catalog verdicts") {
    {
        auto model = make_model(ModelName::CP1);
        const SymplecticPotential base(model);
        const StabilityReport rep = stability_probe(base, default_ray_catalog(model));
        CHECK(rep.semistable_on_catalog);
        CHECK(rep.probe == "F");
        CHECK(rep.header.find("on-catalog") != std::string::npos);
    }
    {
        auto model = make_model(ModelName::Hirzebruch1);
        const SymplecticPotential base(model);
        const StabilityReport rep = stability_probe(base, default_ray_catalog(model));
        CHECK_FALSE(rep.semistable_on_catalog);
        bool found_destabilizing = false;
        for (const RayVerdict& r : rep.rays) {
            if (r.ray.rfind("affine", 0) == 0 && r.terminal_slope < -1e-3) {
                found_destabilizing = true;
                // affine slope is constant in t
                for (double s : r.slopes)
                    CHECK(s == doctest::Approx(r.terminal_slope).epsilon(1e-6));
            }
        }
        CHECK(found_destabilizing);

        const TorusVector b = extremal_field(model).xi0;
        const StabilityReport solrep = stability_probe(base, default_ray_catalog(model), &b, 1e-5);
        CHECK(solrep.semistable_on_catalog);
        CHECK(solrep.probe == "F_X");
    }
}
