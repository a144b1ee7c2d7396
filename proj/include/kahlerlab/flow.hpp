#pragma once

#include <memory>
#include <vector>

#include "kahlerlab/metric.hpp"

namespace kahlerlab {

struct FlowMonitors {
    std::vector<double> t;
    std::vector<double> H;       // H-functional
    std::vector<double> sup_h;   // sup |h| over the grid
    std::vector<double> c;       // normalization constant
    std::vector<double> dH_rhs;  // right side of the dH/dt identity
};

/// Reduced Kahler-Ricci flow state (n = 1): df/dt = log f'' + f - c(t) on a
/// uniform y-grid over [-L, L], Neumann data f'(+-L) frozen at the initial
/// Legendre-dual slopes.
struct FlowState {
    std::shared_ptr<const ManifoldModel> model;
    double L = 0.0;
    std::vector<double> y;
    std::vector<double> f;
    double slope_lo = 0.0;
    double slope_hi = 0.0;
    double t = 0.0;
    double c = 0.0;
    FlowMonitors trace;
};

FlowState make_flow_state(const SymplecticPotential& u0, double L, int m);

/// Ricci potential on the grid: h = -(log f'' + f - c).
std::vector<double> flow_h_values(const FlowState& s);
double flow_H(const FlowState& s);
double flow_sup_h(const FlowState& s);
/// -C_1 int (h_y^2 / f'' - (h - H/V)^2) e^{c - f} dy.
double flow_dH_rhs(const FlowState& s);

/// One semi-implicit backward-Euler step (log f'' implicit via Newton, the
/// reaction term explicit); appends monitors. Throws StepRejected with a
/// halved suggestion on Newton failure or convexity loss.
FlowState krf_step(const FlowState& s, double dt);

/// Symplectic-side dH/dt identity value at a metric:
/// -C_n int (|grad h|^2_g - (h - H/V)^2) e^{h} dlambda.
double dH_dt_identity(const SymplecticPotential& u);

/// Runs the flow to time T, halving dt on rejection (at most 10 consecutive
/// halvings) and doubling it back toward the requested dt after 50 accepted
/// steps.
FlowState run_krf(const SymplecticPotential& u0, double T, double dt, double L, int m);

}  // namespace kahlerlab
