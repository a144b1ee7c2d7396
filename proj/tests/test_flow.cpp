#include <doctest.h>

#include <cmath>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/flow.hpp"
#include "kahlerlab/functionals.hpp"

using namespace kahlerlab;

namespace {

SymplecticPotential cp1_bump(const std::shared_ptr<const ManifoldModel>& model, double amp) {
    return SymplecticPotential(model, psi_from_catalog(model->polytope, "bump_poly", {amp}));
}

}  // namespace

TEST_CASE("flow preconditions") {
    auto model = make_model(ModelName::CP1);
    const SymplecticPotential u(model);
    CHECK_THROWS_AS(make_flow_state(u, 0.0, 257), std::invalid_argument);
    CHECK_THROWS_AS(make_flow_state(u, 10.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(run_krf(u, 1.0, 0.0, 10.0, 257), std::invalid_argument);
    CHECK_THROWS_AS(krf_step(make_flow_state(u, 10.0, 257), -1.0), std::invalid_argument);

    auto f1 = make_model(ModelName::Hirzebruch1);
    CHECK_THROWS_AS(make_flow_state(SymplecticPotential(f1), 10.0, 257), std::invalid_argument);
}

TEST_CASE("round metric is a fixed point modulo gauge drift") {
    auto model = make_model(ModelName::CP1);
    FlowState s = make_flow_state(SymplecticPotential(model), 10.0, 257);
    const std::vector<double> f0 = s.f;

    // discrete h carries the 4th-order FD truncation error of the y-grid
    CHECK(flow_sup_h(s) < 1e-4);
    CHECK(flow_sup_h(make_flow_state(SymplecticPotential(model), 10.0, 513)) < 5e-6);

    FlowState s1 = krf_step(s, 1e-3);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < s1.f.size(); ++i) {
        const double d = s1.f[i] - f0[i];
        lo = std::fmin(lo, d);
        hi = std::fmax(hi, d);
    }
    CHECK(hi - lo < 1e-8);

    for (int k = 0; k < 100; ++k) s = krf_step(s, 1e-3);
    lo = 1e300;
    hi = -1e300;
    for (std::size_t i = 0; i < s.f.size(); ++i) {
        const double d = s.f[i] - f0[i];
        lo = std::fmin(lo, d);
        hi = std::fmax(hi, d);
    }
    CHECK(hi - lo < 1e-6);
}

TEST_CASE("dH/dt identity on the symplectic side") {
    auto model = make_model(ModelName::CP1);
    CHECK(std::fabs(dH_dt_identity(SymplecticPotential(model))) < 1e-8);
    for (const SymplecticPotential& u : random_catalog_metrics(model, 5, 77)) {
        CHECK(dH_dt_identity(u) <= 1e-8);
    }
    // the identity value is (minus) the Poincare-type quadratic form
    CHECK(dH_dt_identity(cp1_bump(model, 0.1)) < 0.0);
}

TEST_CASE("short flow run: monotone H and slope identity") {
    auto model = make_model(ModelName::CP1);
    const FlowState end = run_krf(cp1_bump(model, 0.1), 0.5, 1e-3, 10.0, 257);
    const FlowMonitors& tr = end.trace;
    REQUIRE(tr.t.size() >= 3);

    for (std::size_t k = 1; k < tr.H.size(); ++k) CHECK(tr.H[k] <= tr.H[k - 1] + 1e-9);

    // centered FD of the trace against the recorded identity value
    for (std::size_t k : {tr.t.size() / 4, tr.t.size() / 2, 3 * tr.t.size() / 4}) {
        const double dt = tr.t[k + 1] - tr.t[k];
        const double fd = (tr.H[k + 1] - tr.H[k - 1]) / (2.0 * dt);
        CHECK(std::fabs(fd - tr.dH_rhs[k]) < 0.01 * std::fabs(tr.dH_rhs[k]));
    }

    // H decreased measurably and sup|h| shrank
    CHECK(tr.H.back() < 0.9 * tr.H.front());
    CHECK(tr.sup_h.back() < tr.sup_h.front());

    // nV - H(t) nondecreasing (mu-bound proxy)
    for (std::size_t k = 1; k < tr.H.size(); ++k)
        CHECK(model->n * model->V - tr.H[k] >= model->n * model->V - tr.H[k - 1] - 1e-9);
}

TEST_CASE("T = 0 returns the initial state with one monitor row") {
    auto model = make_model(ModelName::CP1);
    const FlowState s = run_krf(cp1_bump(model, 0.1), 0.0, 1e-3, 10.0, 129);
    CHECK(s.t == 0.0);
    CHECK(s.trace.t.size() == 1);
}

TEST_CASE("flow H matches the symplectic-side functional at t = 0") {
    auto model = make_model(ModelName::CP1, 64);
    const SymplecticPotential u = cp1_bump(model, 0.1);
    const FlowState s = make_flow_state(u, 12.0, 513);
    CHECK(flow_H(s) == doctest::Approx(h_functional(u)).epsilon(1e-5).scale(1.0));
    CHECK(flow_sup_h(s) ==
          doctest::Approx(ricci_potential(u).sup_abs()).epsilon(1e-3).scale(1.0));
    CHECK(flow_dH_rhs(s) == doctest::Approx(dH_dt_identity(u)).epsilon(1e-3).scale(1e-6));
}
