#include "kahlerlab/functionals.hpp"

#include <cmath>

namespace kahlerlab {

double h_functional(const SymplecticPotential& u) {
    const ManifoldModel& m = u.model();
    const RicciPotential r = ricci_potential(u);
    return m.C_n * u.quad().integrate_product(r.h, r.eh);
}

WMuBound w_and_mu_bound(const SymplecticPotential& u) {
    const ManifoldModel& m = u.model();
    const QuadratureRule& q = u.quad();
    const RicciPotential r = ricci_potential(u);

    std::vector<double> integrand(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Vec x = q.nodes[i];
        const Vec g = ricci_h_grad(u, x);
        const Mat U = inverse(u.jet(x).h, m.n);
        const double grad_sq = dot(g, matvec(U, g, m.n), m.n);
        integrand[i] = m.n + ricci_h_laplacian(u, x) + grad_sq - r.h[i];
    }
    WMuBound out;
    out.W_at_minus_h = m.C_n * q.integrate_product(integrand, r.eh);
    out.mu_bound = m.n * m.V - m.C_n * q.integrate_product(r.h, r.eh);
    return out;
}

namespace {

std::vector<double> direction_values(const GeodesicPath& path, const QuadratureRule& q) {
    std::vector<double> v(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) v[i] = path.v_value(q.nodes[i]);
    return v;
}

}  // namespace

PathDerivatives f_derivative_along(const GeodesicPath& path, double t) {
    const ManifoldModel& m = path.u0.model();
    const SymplecticPotential u_t = path.at(t);
    const QuadratureRule& q = u_t.quad();
    const std::vector<double> v = direction_values(path, q);
    const RicciPotential r = ricci_potential(u_t);

    PathDerivatives out;
    out.dE0 = (m.C_n / m.V) * q.integrate(v);
    out.dF = out.dE0 - (m.C_n / m.V) * q.integrate_product(v, r.eh);
    return out;
}

double modified_f_derivative_along(const GeodesicPath& path, double t, const TorusVector& X) {
    const ManifoldModel& m = path.u0.model();
    const SymplecticPotential u_t = path.at(t);
    const QuadratureRule& q = u_t.quad();
    const std::vector<double> v = direction_values(path, q);
    const RicciPotential r = ricci_potential(u_t);

    std::vector<double> ex(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        ex[i] = std::exp(theta_value(X, q.nodes[i], m.n));
    return (m.C_n / m.V) * (q.integrate_product(v, ex) - q.integrate_product(v, r.eh));
}

double f_value(const GeodesicPath& path, double t) {
    const ManifoldModel& m = path.u0.model();
    const SymplecticPotential u_0 = path.at(0.0);
    const QuadratureRule& q = u_0.quad();
    const std::vector<double> v = direction_values(path, q);
    const double dE0 = (m.C_n / m.V) * q.integrate(v);
    const double c_t = ricci_potential(path.at(t)).c;
    const double c_0 = ricci_potential(u_0).c;
    return t * dE0 + c_t - c_0;
}

FunctionalReport functional_report(const std::string& name,
                                   const std::function<double(int)>& eval, int quad_points) {
    FunctionalReport rep;
    rep.name = name;
    rep.quadrature_points = quad_points;
    rep.value = eval(quad_points);
    const double refined = eval(2 * quad_points);
    const double scale = std::fmax(std::fabs(rep.value), std::fabs(refined));
    rep.refinement_delta = scale > 0.0 ? std::fabs(refined - rep.value) / scale : 0.0;
    rep.converged = rep.refinement_delta < 1e-8;
    return rep;
}

}  // namespace kahlerlab
