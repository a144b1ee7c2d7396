#pragma once

#include <stdexcept>
#include <string>

namespace kahlerlab {

/// Hessian of a symplectic potential failed positive-definiteness at a node.
struct DegenerateMetricError : std::runtime_error {
    explicit DegenerateMetricError(const std::string& what) : std::runtime_error(what) {}
};

/// A Newton or continuation loop exhausted its iteration budget.
struct ConvergenceFailure : std::runtime_error {
    ConvergenceFailure(const std::string& what, double residual)
        : std::runtime_error(what), best_residual(residual) {}
    double best_residual;
};

/// A normalization or monitoring integral left the representable range.
struct NumericalOverflow : std::runtime_error {
    explicit NumericalOverflow(const std::string& what) : std::runtime_error(what) {}
};

/// Implicit time step could not be completed at the requested dt.
struct StepRejected : std::runtime_error {
    StepRejected(const std::string& what, double dt_suggested)
        : std::runtime_error(what), suggested_dt(dt_suggested) {}
    double suggested_dt;
};

}  // namespace kahlerlab
