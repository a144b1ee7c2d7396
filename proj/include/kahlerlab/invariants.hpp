#pragma once

#include <memory>
#include <vector>

#include "kahlerlab/metric.hpp"

namespace kahlerlab {

/// Element xi of the torus Lie algebra with Hamiltonian theta(x) = <xi,x> + c,
/// normalized so that int_P e^{theta} dlambda = vol(P).
struct TorusVector {
    Vec xi{0.0, 0.0};
    double c = 0.0;
};

TorusVector make_torus_vector(const ManifoldModel& m, const Vec& xi);

double theta_value(const TorusVector& t, const Vec& x, int dim);
std::vector<double> theta_values(const QuadratureRule& q, int dim, const TorusVector& t);

/// H(xi) = C_n int_P theta_xi e^{h} dlambda (metric-independent).
double h_invariant(const SymplecticPotential& u, const TorusVector& xi);

/// Two independent computations of the Futaki invariant.
struct FutakiPair {
    double measure = 0.0;   // C_n (int theta e^h - int theta)
    double gradient = 0.0;  // C_n int xi^T (D2u)^{-1} grad h
};
FutakiPair futaki(const SymplecticPotential& u, const TorusVector& xi);

/// F_X(xi) = C_n int theta_xi (e^h - e^{theta_X}) dlambda.
double modified_futaki(const SymplecticPotential& u, const TorusVector& xi, const TorusVector& X);
/// Same invariant through the relation F(xi) - C_n int theta_xi (e^{theta_X} - 1).
double modified_futaki_relation(const SymplecticPotential& u, const TorusVector& xi,
                                const TorusVector& X);

/// beta = int_P x e^{h} dlambda / vol(P), computed with the reference metric
/// and re-checked against one perturbed metric.
struct BetaReport {
    Vec beta{0.0, 0.0};
    double independence_delta = 0.0;  // max |beta_ref - beta_perturbed|
};
BetaReport beta_vector(const std::shared_ptr<const ManifoldModel>& model);

/// The soliton/extremal field: maximizer of the concave map xi -> H(xi),
/// computed by two independent routes.
struct ExtremalFieldReport {
    TorusVector xi0;
    Vec route_maximizer{0.0, 0.0};   // damped Newton on H with FD derivatives
    Vec route_barycenter{0.0, 0.0};  // Newton on the weighted-barycenter equation
    double route_delta = 0.0;        // max componentwise disagreement
    double grad_norm = 0.0;          // FD gradient of H at xi0
    double h_at_xi0 = 0.0;
    int iterations_maximizer = 0;
    int iterations_barycenter = 0;
};
ExtremalFieldReport extremal_field(const std::shared_ptr<const ManifoldModel>& model);

}  // namespace kahlerlab
