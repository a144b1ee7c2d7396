#include "kahlerlab/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/functionals.hpp"

namespace kahlerlab {

GeodesicPath make_geodesic(SymplecticPotential u0, Direction v, double t_max) {
    GeodesicPath path{std::move(u0), std::move(v)};
    for (double t : {0.0, 0.5 * t_max, t_max}) {
        if (!(path.at(t).hessian_margin() > 0.0))
            throw DegenerateMetricError("geodesic direction degenerates the metric on [0, t_max]");
    }
    return path;
}

double h_of_t(const GeodesicPath& path, double t) {
    const ManifoldModel& m = path.u0.model();
    const SymplecticPotential u_t = path.at(t);
    const QuadratureRule& q = u_t.quad();
    const RicciPotential r = ricci_potential(u_t);
    std::vector<double> v(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) v[i] = path.v_value(q.nodes[i]);
    return -m.C_n * q.integrate_product(v, r.eh);
}

DhDtIdentity dh_dt_identity(const GeodesicPath& path, double t) {
    const ManifoldModel& m = path.u0.model();

    DhDtIdentity out;
    const double step = 1e-3;
    auto central = [&](double d) { return (h_of_t(path, t + d) - h_of_t(path, t - d)) / (2.0 * d); };
    out.fd_slope = (4.0 * central(step) - central(2.0 * step)) / 3.0;  // Richardson

    const SymplecticPotential u_t = path.at(t);
    const QuadratureRule& q = u_t.quad();
    const RicciPotential r = ricci_potential(u_t);
    std::vector<double> v(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) v[i] = path.v_value(q.nodes[i]);
    const double a = q.integrate_product(v, r.eh) / m.vol;

    std::vector<double> integrand(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Vec x = q.nodes[i];
        const Vec g = path.v_grad(x);
        const Mat U = inverse(u_t.jet(x).h, m.n);
        const double grad_sq = dot(g, matvec(U, g, m.n), m.n);
        const double shifted = -v[i] + a;
        integrand[i] = grad_sq - shifted * shifted;
    }
    out.rhs = m.C_n * q.integrate_product(integrand, r.eh);
    return out;
}

EpsGeodesicSolution eps_geodesic_solve(const EpsGeodesicProblem& problem) {
    if (!(problem.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (problem.nt < 3) throw std::invalid_argument("t-mesh needs at least 3 rows");
    const int ny = static_cast<int>(problem.f0.grid.size());
    if (static_cast<int>(problem.f1.grid.size()) != ny || ny < 5)
        throw std::invalid_argument("endpoint grids must match and have >= 5 points");
    if (static_cast<int>(problem.ref.size()) != ny)
        throw std::invalid_argument("reference density must live on the y-grid");
    for (int j = 1; j + 1 < ny; ++j) {
        const double d0 = problem.f0.values[j + 1] - 2.0 * problem.f0.values[j] +
                          problem.f0.values[j - 1];
        const double d1 = problem.f1.values[j + 1] - 2.0 * problem.f1.values[j] +
                          problem.f1.values[j - 1];
        if (!(d0 > 0.0) || !(d1 > 0.0))
            throw std::invalid_argument("endpoint potentials must be strictly convex");
    }

    const int nt = problem.nt;
    const double dt = problem.T / (nt - 1);
    const double dy = problem.f0.grid[1] - problem.f0.grid[0];
    const int n_unknown = (nt - 2) * ny;

    // full mesh including Dirichlet rows
    std::vector<double> F(static_cast<std::size_t>(nt) * ny);
    if (static_cast<int>(problem.init.size()) == nt * ny) {
        F = problem.init;
    } else {
        for (int i = 0; i < nt; ++i) {
            const double s = static_cast<double>(i) / (nt - 1);
            for (int j = 0; j < ny; ++j)
                F[i * ny + j] = (1.0 - s) * problem.f0.values[j] + s * problem.f1.values[j];
        }
    }
    for (int j = 0; j < ny; ++j) {
        F[j] = problem.f0.values[j];
        F[(nt - 1) * ny + j] = problem.f1.values[j];
    }

    const bool has_rows = static_cast<int>(problem.slope_lo.size()) == nt &&
                          static_cast<int>(problem.slope_hi.size()) == nt;
    auto slope_at = [&](int i, bool hi) {
        if (has_rows) return hi ? problem.slope_hi[i] : problem.slope_lo[i];
        const double s = static_cast<double>(i) / (nt - 1);
        const double a = hi ? problem.f0.slope_hi : problem.f0.slope_lo;
        const double b = hi ? problem.f1.slope_hi : problem.f1.slope_lo;
        return (1.0 - s) * a + s * b;
    };

    auto assemble = [&](std::vector<double>& G, std::vector<Eigen::Triplet<double>>* trip) {
        G.assign(n_unknown, 0.0);
        for (int i = 1; i + 1 < nt; ++i) {
            for (int j = 0; j < ny; ++j) {
                const int row = (i - 1) * ny + j;
                auto idx = [&](int ii, int jj) { return ii * ny + jj; };
                auto unknown = [&](int ii, int jj) -> int {
                    return (ii >= 1 && ii + 1 < nt) ? (ii - 1) * ny + jj : -1;
                };
                if (j == 0 || j == ny - 1) {
                    const int sgn = (j == 0) ? 1 : -1;
                    const int j0 = j, j1 = j + sgn, j2 = j + 2 * sgn;
                    G[row] = sgn *
                                 (-3.0 * F[idx(i, j0)] + 4.0 * F[idx(i, j1)] - F[idx(i, j2)]) /
                                 (2.0 * dy) -
                             slope_at(i, j != 0);
                    if (trip) {
                        trip->emplace_back(row, unknown(i, j0), sgn * -3.0 / (2.0 * dy));
                        trip->emplace_back(row, unknown(i, j1), sgn * 4.0 / (2.0 * dy));
                        trip->emplace_back(row, unknown(i, j2), sgn * -1.0 / (2.0 * dy));
                    }
                    continue;
                }
                const double A = (F[idx(i + 1, j)] - 2.0 * F[idx(i, j)] + F[idx(i - 1, j)]) /
                                 (dt * dt);
                const double B = (F[idx(i, j + 1)] - 2.0 * F[idx(i, j)] + F[idx(i, j - 1)]) /
                                 (dy * dy);
                const double C = (F[idx(i + 1, j + 1)] - F[idx(i + 1, j - 1)] -
                                  F[idx(i - 1, j + 1)] + F[idx(i - 1, j - 1)]) /
                                 (4.0 * dt * dy);
                G[row] = A * B - C * C - problem.epsilon * problem.ref[j];
                if (!trip) continue;
                auto add = [&](int ii, int jj, double val) {
                    const int col = unknown(ii, jj);
                    if (col >= 0) trip->emplace_back(row, col, val);
                };
                add(i, j, -2.0 * B / (dt * dt) - 2.0 * A / (dy * dy));
                add(i + 1, j, B / (dt * dt));
                add(i - 1, j, B / (dt * dt));
                add(i, j + 1, A / (dy * dy));
                add(i, j - 1, A / (dy * dy));
                const double cc = -2.0 * C / (4.0 * dt * dy);
                add(i + 1, j + 1, cc);
                add(i - 1, j - 1, cc);
                add(i + 1, j - 1, -cc);
                add(i - 1, j + 1, -cc);
            }
        }
    };

    auto norm_of = [](const std::vector<double>& g) {
        double r = 0.0;
        for (double v : g) r = std::fmax(r, std::fabs(v));
        return r;
    };

    EpsGeodesicSolution sol;
    sol.nt = nt;
    sol.ny = ny;

    std::vector<double> G;
    assemble(G, nullptr);
    double res = norm_of(G);
    double best_res = res;

    Eigen::SparseMatrix<double> J(n_unknown, n_unknown);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    for (int it = 0; it < 60; ++it) {
        if (res < 1e-11) break;
        std::vector<Eigen::Triplet<double>> trip;
        assemble(G, &trip);
        J.setFromTriplets(trip.begin(), trip.end());
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw ConvergenceFailure("eps-geodesic Jacobian factorization failed", res);
        Eigen::VectorXd rhs(n_unknown);
        for (int k = 0; k < n_unknown; ++k) rhs[k] = -G[k];
        const Eigen::VectorXd d = lu.solve(rhs);

        // backtracking on the residual norm
        double alpha = 1.0;
        std::vector<double> saved = F;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            for (int i = 1; i + 1 < nt; ++i)
                for (int j = 0; j < ny; ++j)
                    F[i * ny + j] = saved[i * ny + j] + alpha * d[(i - 1) * ny + j];
            std::vector<double> Gt;
            assemble(Gt, nullptr);
            const double rt = norm_of(Gt);
            if (rt < res) {
                res = rt;
                accepted = true;
                break;
            }
            alpha /= 2.0;
        }
        ++sol.newton_iterations;
        if (!accepted) {
            F = saved;
            break;
        }
        best_res = std::fmin(best_res, res);
    }
    if (res > 1e-8) throw ConvergenceFailure("eps-geodesic Newton did not converge", best_res);

    sol.F = std::move(F);
    sol.residual = res;
    return sol;
}

std::vector<RaySpec> default_ray_catalog(const std::shared_ptr<const ManifoldModel>& model,
                                         double delta) {
    std::vector<RaySpec> out;
    const int n = model->n;
    const char* axis[2] = {"e1", "e2"};
    for (int a = 0; a < n; ++a) {
        for (int sign : {+1, -1}) {
            Vec xi{0.0, 0.0};
            xi[a] = sign;
            const TorusVector tv = make_torus_vector(*model, xi);
            AffineDirection aff;
            aff.a = Vec{-tv.xi[0], -tv.xi[1]};
            aff.b = -tv.c;
            out.push_back({std::string("affine_") + (sign > 0 ? "+" : "-") + axis[a],
                           Direction{aff}});
        }
    }
    {
        HingeDirection h;
        h.a = Vec{1.0, 0.0};
        h.b = -0.1;
        h.delta = delta;
        out.push_back({"pl_x", Direction{h}});
    }
    if (n == 2) {
        HingeDirection h;
        h.a = Vec{0.0, 1.0};
        h.b = -0.2;
        h.delta = delta;
        out.push_back({"pl_y", Direction{h}});
    }
    {
        Poly2 p(n, 2);
        p.coeff(2, 0) = 0.5;
        if (n == 2) {
            p.coeff(0, 2) = 0.5;
            p.coeff(1, 1) = 0.2;
        }
        out.push_back({"poly_quadratic", Direction{PolyDirection{p}}});
    }
    return out;
}

StabilityReport stability_probe(const SymplecticPotential& base,
                                const std::vector<RaySpec>& catalog, const TorusVector* X,
                                double tolerance) {
    StabilityReport rep;
    rep.header =
        "on-catalog verdict: a finite ray family cannot certify the universally "
        "quantified stability statement; no claim is made beyond the sampled rays";
    rep.probe = X ? "F_X" : "F";
    rep.sample_times = {0.0, 1.0, 2.0, 4.0, 8.0};
    rep.tolerance = tolerance;
    rep.semistable_on_catalog = true;

    for (const RaySpec& ray : catalog) {
        const GeodesicPath path = make_geodesic(base, ray.v, rep.sample_times.back());
        RayVerdict verdict;
        verdict.ray = ray.name;
        for (double t : rep.sample_times) {
            const double slope = X ? modified_f_derivative_along(path, t, *X)
                                   : f_derivative_along(path, t).dF;
            verdict.slopes.push_back(slope);
            if (!verdict.first_nonnegative_t && slope >= 0.0) verdict.first_nonnegative_t = t;
        }
        verdict.terminal_slope = verdict.slopes.back();
        if (verdict.terminal_slope < -tolerance) rep.semistable_on_catalog = false;
        rep.rays.push_back(std::move(verdict));
    }
    return rep;
}

}  // namespace kahlerlab
