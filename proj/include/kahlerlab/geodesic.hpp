#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kahlerlab/invariants.hpp"
#include "kahlerlab/metric.hpp"

namespace kahlerlab {

/// Toric geodesic u_t = u0 + t v with a convex direction v; the Kahler-side
/// velocity satisfies phi_dot(moment map(x)) = -v(x).
struct GeodesicPath {
    SymplecticPotential u0;
    Direction v;

    SymplecticPotential at(double t) const { return u0.with_direction(v, t); }
    double v_value(const Vec& x) const { return direction_value(v, x, u0.model().n); }
    Vec v_grad(const Vec& x) const { return direction_jet(v, x, u0.model().n).g; }
};

/// Validates D2u_t > 0 at the quadrature nodes over sampled t in [0, t_max].
GeodesicPath make_geodesic(SymplecticPotential u0, Direction v, double t_max = 8.0);

/// H(t) = int phi_dot e^{h_t} omega^n = -C_n int_P v e^{h_t} dlambda.
double h_of_t(const GeodesicPath& path, double t);

/// dH/dt on an exact toric geodesic: finite-difference slope of h_of_t against
/// the quadrature of C_n int (|grad v|^2_g - (-v + a)^2) e^{h_t}, a fixed by
/// int (phi_dot + a) e^h omega^n = 0.
struct DhDtIdentity {
    double fd_slope = 0.0;
    double rhs = 0.0;
};
DhDtIdentity dh_dt_identity(const GeodesicPath& path, double t);

/// Chen's epsilon-regularized geodesic: F_tt F_yy - F_ty^2 = eps * ref on
/// [0,T] x [-L,L] with Dirichlet rows from f0/f1 and Neumann y-columns.
struct EpsGeodesicProblem {
    ComplexPotential f0;
    ComplexPotential f1;
    double epsilon = 1e-1;
    double T = 1.0;
    int nt = 0;                    // t-mesh points including both Dirichlet rows
    std::vector<double> ref;      // reference density at the y-grid of f0
    std::vector<double> init;     // optional nt*ny warm start (row-major in t)
    std::vector<double> slope_lo;  // optional per-row Neumann data f_y(t_i, -L);
    std::vector<double> slope_hi;  // size nt each; default interpolates f0/f1 slopes
};

struct EpsGeodesicSolution {
    int nt = 0;
    int ny = 0;
    std::vector<double> F;  // row-major: F[i*ny + j] at (t_i, y_j)
    double residual = 0.0;
    int newton_iterations = 0;
};

EpsGeodesicSolution eps_geodesic_solve(const EpsGeodesicProblem& problem);

/// Named ray directions for the stability catalogs.
struct RaySpec {
    std::string name;
    Direction v;
};

/// Affine rays from +-basis fields, one smoothed piecewise-linear ray, and one
/// convex polynomial ray. Affine rays use v = -theta_xi so that dF/dt along
/// the ray equals F(xi)/V.
std::vector<RaySpec> default_ray_catalog(const std::shared_ptr<const ManifoldModel>& model,
                                         double delta = 1e-2);

struct RayVerdict {
    std::string ray;
    std::vector<double> slopes;  // dF/dt (or dF_X/dt) at the sample times
    double terminal_slope = 0.0;
    std::optional<double> first_nonnegative_t;
};

struct StabilityReport {
    std::string header;  // states the on-catalog scope of the verdict
    std::string probe;   // "F" or "F_X"
    std::vector<double> sample_times;
    std::vector<RayVerdict> rays;
    double tolerance = 0.0;
    bool semistable_on_catalog = false;
};

/// Samples dF/dt (X = nullptr) or dF_X/dt along each catalog ray at
/// t in {0, 1, 2, 4, 8} and issues the on-catalog verdict.
StabilityReport stability_probe(const SymplecticPotential& base,
                                const std::vector<RaySpec>& catalog,
                                const TorusVector* X = nullptr, double tolerance = 1e-6);

}  // namespace kahlerlab
