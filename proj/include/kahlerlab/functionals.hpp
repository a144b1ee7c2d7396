#pragma once

#include <functional>
#include <map>
#include <string>

#include "kahlerlab/geodesic.hpp"
#include "kahlerlab/invariants.hpp"
#include "kahlerlab/metric.hpp"

namespace kahlerlab {

/// H-functional = C_n int_P h e^{h} dlambda (>= 0 by Jensen).
double h_functional(const SymplecticPotential& u);

/// W(omega, -h) by direct quadrature of (n + Lap_g h + |grad h|^2_g - h) e^h
/// against the identity value nV - H(omega); agreement is the test.
struct WMuBound {
    double W_at_minus_h = 0.0;
    double mu_bound = 0.0;  // nV - H(omega)
};
WMuBound w_and_mu_bound(const SymplecticPotential& u);

/// Derivatives of E0 and of the Ding functional F along a toric geodesic.
struct PathDerivatives {
    double dE0 = 0.0;  // (C_n/V) int_P v dlambda, constant in t
    double dF = 0.0;   // dE0 - (C_n/V) int_P v e^{h_t} dlambda
};
PathDerivatives f_derivative_along(const GeodesicPath& path, double t);

/// dF_X/dt = (C_n/V)(int v e^{theta_X} - int v e^{h_t}); X = 0 reduces to dF.
double modified_f_derivative_along(const GeodesicPath& path, double t, const TorusVector& X);

/// F(t) with the cocycle normalization F(0) = 0; equals t dE0 + c_t - c_0
/// where c_t is the Ricci normalization constant of u_t.
double f_value(const GeodesicPath& path, double t);

/// Scalar functional evaluated at two quadrature resolutions.
struct FunctionalReport {
    std::string name;
    double value = 0.0;
    std::map<std::string, double> normalization_constants;
    int quadrature_points = 0;
    double refinement_delta = 0.0;  // relative change at doubled resolution
    bool converged = false;         // refinement_delta < 1e-8
};

/// Runs `eval` at `quad_points` and at doubled resolution and fills the
/// convergence flag.
FunctionalReport functional_report(const std::string& name,
                                   const std::function<double(int)>& eval, int quad_points);

}  // namespace kahlerlab
