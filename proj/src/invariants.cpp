#include "kahlerlab/invariants.hpp"

#include <cmath>

#include "kahlerlab/errors.hpp"

namespace kahlerlab {

namespace {

double exp_mass(const ManifoldModel& m, const Vec& xi) {
    std::vector<double> f(m.quad.size());
    for (std::size_t i = 0; i < m.quad.size(); ++i)
        f[i] = std::exp(dot(xi, m.quad.nodes[i], m.n));
    return m.quad.integrate(f);
}

}  // namespace

TorusVector make_torus_vector(const ManifoldModel& m, const Vec& xi) {
    TorusVector t;
    t.xi = xi;
    t.c = std::log(m.vol) - std::log(exp_mass(m, xi));
    return t;
}

double theta_value(const TorusVector& t, const Vec& x, int dim) {
    return dot(t.xi, x, dim) + t.c;
}

std::vector<double> theta_values(const QuadratureRule& q, int dim, const TorusVector& t) {
    std::vector<double> out(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = theta_value(t, q.nodes[i], dim);
    return out;
}

double h_invariant(const SymplecticPotential& u, const TorusVector& xi) {
    const ManifoldModel& m = u.model();
    const QuadratureRule& q = u.quad();
    const RicciPotential r = ricci_potential(u);
    const std::vector<double> theta = theta_values(q, m.n, xi);
    return m.C_n * q.integrate_product(theta, r.eh);
}

FutakiPair futaki(const SymplecticPotential& u, const TorusVector& xi) {
    const ManifoldModel& m = u.model();
    const QuadratureRule& q = u.quad();
    const RicciPotential r = ricci_potential(u);
    const std::vector<double> theta = theta_values(q, m.n, xi);

    FutakiPair out;
    std::vector<double> ones(q.size(), 1.0);
    out.measure =
        m.C_n * (q.integrate_product(theta, r.eh) - q.integrate_product(theta, ones));

    std::vector<double> pairing(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Vec x = q.nodes[i];
        const Mat U = inverse(u.jet(x).h, m.n);
        pairing[i] = dot(xi.xi, matvec(U, ricci_h_grad(u, x), m.n), m.n);
    }
    out.gradient = m.C_n * q.integrate(pairing);
    return out;
}

double modified_futaki(const SymplecticPotential& u, const TorusVector& xi,
                       const TorusVector& X) {
    const ManifoldModel& m = u.model();
    const QuadratureRule& q = u.quad();
    const RicciPotential r = ricci_potential(u);
    const std::vector<double> theta = theta_values(q, m.n, xi);
    std::vector<double> diff(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        diff[i] = r.eh[i] - std::exp(theta_value(X, q.nodes[i], m.n));
    return m.C_n * q.integrate_product(theta, diff);
}

double modified_futaki_relation(const SymplecticPotential& u, const TorusVector& xi,
                                const TorusVector& X) {
    const ManifoldModel& m = u.model();
    const QuadratureRule& q = u.quad();
    const std::vector<double> theta = theta_values(q, m.n, xi);
    std::vector<double> w(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        w[i] = std::exp(theta_value(X, q.nodes[i], m.n)) - 1.0;
    return futaki(u, xi).measure - m.C_n * q.integrate_product(theta, w);
}

BetaReport beta_vector(const std::shared_ptr<const ManifoldModel>& model) {
    auto beta_of = [&](const SymplecticPotential& u) {
        const QuadratureRule& q = u.quad();
        const RicciPotential r = ricci_potential(u);
        Vec b{0.0, 0.0};
        std::vector<double> coord(q.size());
        for (int a = 0; a < model->n; ++a) {
            for (std::size_t i = 0; i < q.size(); ++i) coord[i] = q.nodes[i][a];
            b[a] = q.integrate_product(coord, r.eh) / model->vol;
        }
        return b;
    };

    BetaReport rep;
    rep.beta = beta_of(SymplecticPotential(model));
    const Vec other = beta_of(random_catalog_metrics(model, 1, 17, 0.05).front());
    for (int a = 0; a < model->n; ++a)
        rep.independence_delta = std::fmax(rep.independence_delta,
                                           std::fabs(rep.beta[a] - other[a]));
    return rep;
}

namespace {

struct ExpMoments {
    double mass = 0.0;
    Vec first{0.0, 0.0};
    Mat second{0.0, 0.0, 0.0, 0.0};
};

ExpMoments exp_moments(const ManifoldModel& m, const Vec& xi) {
    ExpMoments em;
    for (std::size_t i = 0; i < m.quad.size(); ++i) {
        const Vec& x = m.quad.nodes[i];
        const double w = m.quad.weights[i] * std::exp(dot(xi, x, m.n));
        em.mass += w;
        for (int a = 0; a < m.n; ++a) {
            em.first[a] += w * x[a];
            for (int b = 0; b < m.n; ++b) em.second[a * 2 + b] += w * x[a] * x[b];
        }
    }
    return em;
}

}  // namespace

ExtremalFieldReport extremal_field(const std::shared_ptr<const ManifoldModel>& model) {
    const ManifoldModel& m = *model;
    const RicciPotential ref = ricci_potential(SymplecticPotential(model));

    // first moment of e^h dlambda, fixed across xi
    Vec m1{0.0, 0.0};
    {
        std::vector<double> coord(m.quad.size());
        for (int a = 0; a < m.n; ++a) {
            for (std::size_t i = 0; i < m.quad.size(); ++i) coord[i] = m.quad.nodes[i][a];
            m1[a] = m.quad.integrate_product(coord, ref.eh);
        }
    }
    auto H = [&](const Vec& xi) {
        const double c = std::log(m.vol) - std::log(exp_mass(m, xi));
        return m.C_n * (dot(xi, m1, m.n) + c * m.vol);
    };
    auto fd_grad = [&](const Vec& xi, double step) {
        Vec g{0.0, 0.0};
        for (int a = 0; a < m.n; ++a) {
            Vec p = xi, q = xi;
            p[a] += step;
            q[a] -= step;
            g[a] = (H(p) - H(q)) / (2.0 * step);
        }
        return g;
    };

    ExtremalFieldReport rep;

    // route (a): damped Newton on the concave objective with FD derivatives
    {
        Vec xi{0.0, 0.0};
        double best_res = std::numeric_limits<double>::infinity();
        bool done = false;
        for (int it = 0; it < 100 && !done; ++it) {
            const Vec g = fd_grad(xi, 1e-5);
            const double gn = norm_inf(g, m.n);
            best_res = std::fmin(best_res, gn);
            if (gn < 1e-10 * m.V) {
                done = true;
                break;
            }
            Mat hess{0.0, 0.0, 0.0, 0.0};
            const double hstep = 1e-4;
            for (int a = 0; a < m.n; ++a) {
                Vec p = xi, q = xi;
                p[a] += hstep;
                q[a] -= hstep;
                const Vec gp = fd_grad(p, 1e-5);
                const Vec gq = fd_grad(q, 1e-5);
                for (int b = 0; b < m.n; ++b) hess[b * 2 + a] = (gp[b] - gq[b]) / (2.0 * hstep);
            }
            const Vec dir = solve(hess, Vec{-g[0], -g[1]}, m.n);
            double alpha = 1.0;
            const double h0 = H(xi);
            for (int ls = 0; ls < 40; ++ls) {
                const Vec trial{xi[0] + alpha * dir[0], xi[1] + alpha * dir[1]};
                if (H(trial) > h0) {
                    xi = trial;
                    break;
                }
                alpha /= 2.0;
            }
            ++rep.iterations_maximizer;
        }
        if (!done) throw ConvergenceFailure("extremal field maximizer did not converge", best_res);
        rep.route_maximizer = xi;
    }

    // route (b): Newton on weighted barycenter = beta, Jacobian = covariance
    {
        const Vec beta{m1[0] / m.vol, m1[1] / m.vol};
        Vec xi{0.0, 0.0};
        double best_res = std::numeric_limits<double>::infinity();
        bool done = false;
        for (int it = 0; it < 100; ++it) {
            const ExpMoments em = exp_moments(m, xi);
            Vec r{0.0, 0.0};
            Mat cov{0.0, 0.0, 0.0, 0.0};
            for (int a = 0; a < m.n; ++a) {
                r[a] = em.first[a] / em.mass - beta[a];
                for (int b = 0; b < m.n; ++b)
                    cov[a * 2 + b] = em.second[a * 2 + b] / em.mass -
                                     em.first[a] * em.first[b] / (em.mass * em.mass);
            }
            const double rn = norm_inf(r, m.n);
            best_res = std::fmin(best_res, rn);
            ++rep.iterations_barycenter;
            if (rn < 1e-13) {
                done = true;
                break;
            }
            const Vec d = solve(cov, Vec{-r[0], -r[1]}, m.n);
            xi[0] += d[0];
            xi[1] += d[1];
        }
        if (!done)
            throw ConvergenceFailure("extremal field barycenter Newton did not converge", best_res);
        rep.route_barycenter = xi;
    }

    for (int a = 0; a < m.n; ++a)
        rep.route_delta = std::fmax(rep.route_delta,
                                    std::fabs(rep.route_maximizer[a] - rep.route_barycenter[a]));
    rep.xi0 = make_torus_vector(m, rep.route_barycenter);
    rep.grad_norm = norm_inf(fd_grad(rep.xi0.xi, 1e-5), m.n);
    rep.h_at_xi0 = H(rep.xi0.xi);
    return rep;
}

}  // namespace kahlerlab
