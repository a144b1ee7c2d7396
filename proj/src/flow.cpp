#include "kahlerlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "kahlerlab/errors.hpp"

namespace kahlerlab {

namespace {

// Fornberg's algorithm: weights of the order-m derivative at x0 on nodes x.
std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<std::vector<double>>> d(
        m + 1, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
    d[0][0][0] = 1.0;
    double c1 = 1.0;
    for (int i = 1; i < n; ++i) {
        double c2 = 1.0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            for (int k = 0; k <= std::min(i, m); ++k) {
                d[k][i][j] = ((x[i] - x0) * d[k][i - 1][j] -
                              (k > 0 ? k * d[k - 1][i - 1][j] : 0.0)) /
                             c3;
            }
        }
        for (int k = 0; k <= std::min(i, m); ++k) {
            d[k][i][i] = (c1 / c2) * ((k > 0 ? k * d[k - 1][i - 1][i - 1] : 0.0) -
                                      (x[i - 1] - x0) * d[k][i - 1][i - 1]);
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = d[m][n - 1][j];
    return w;
}

struct StencilRow {
    int start = 0;
    std::vector<double> w;
};

// fourth-order rows on a uniform grid (centered where possible)
std::vector<StencilRow> derivative_rows(const std::vector<double>& y, int order) {
    const int m = static_cast<int>(y.size());
    const int width = (order == 1) ? 5 : 5;
    const int wide = 6;  // off-center second-derivative windows need 6 nodes
    std::vector<StencilRow> rows(m);
    for (int i = 0; i < m; ++i) {
        int start, n;
        if (i >= 2 && i <= m - 3) {
            start = i - 2;
            n = width;
        } else {
            n = (order == 2) ? wide : width;
            start = (i < 2) ? 0 : m - n;
        }
        std::vector<double> nodes(y.begin() + start, y.begin() + start + n);
        rows[i] = {start, fd_weights(y[i], nodes, order)};
    }
    return rows;
}

double apply_row(const StencilRow& r, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < r.w.size(); ++k) s += r.w[k] * f[r.start + k];
    return s;
}

// composite Simpson; a 3/8 block absorbs an odd interval count
double simpson(const std::vector<double>& f, double dy) {
    const int m = static_cast<int>(f.size());
    const int intervals = m - 1;
    double s = 0.0;
    int end = m - 1;
    if (intervals % 2 != 0) {
        end = m - 4;
        s += 3.0 * dy / 8.0 * (f[m - 4] + 3.0 * f[m - 3] + 3.0 * f[m - 2] + f[m - 1]);
    }
    for (int i = 0; i + 2 <= end; i += 2) s += dy / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    return s;
}

const std::vector<StencilRow>& cached_d2_rows(const std::vector<double>& y, double L) {
    static thread_local std::vector<StencilRow> rows;
    static thread_local std::size_t rows_m = 0;
    static thread_local double rows_L = 0.0;
    if (rows_m != y.size() || rows_L != L) {
        rows = derivative_rows(y, 2);
        rows_m = y.size();
        rows_L = L;
    }
    return rows;
}

std::vector<double> second_derivative(const FlowState& s) {
    const std::vector<StencilRow>& rows = cached_d2_rows(s.y, s.L);
    std::vector<double> d2(s.y.size());
    for (std::size_t i = 0; i < s.y.size(); ++i) d2[i] = apply_row(rows[i], s.f);
    return d2;
}

double normalization_constant(const FlowState& s) {
    const double dy = s.y[1] - s.y[0];
    std::vector<double> w(s.f.size());
    for (std::size_t i = 0; i < s.f.size(); ++i) w[i] = std::exp(-s.f[i]);
    // analytic tails of int e^{-f} dy under linear extension at the frozen slopes
    const double mass = simpson(w, dy) + w.front() / std::fabs(s.slope_lo) +
                        w.back() / s.slope_hi;
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw NumericalOverflow("flow normalization integral is not finite");
    return std::log(s.model->vol) - std::log(mass);
}

void append_monitors(FlowState& s) {
    s.trace.t.push_back(s.t);
    s.trace.H.push_back(flow_H(s));
    s.trace.sup_h.push_back(flow_sup_h(s));
    s.trace.c.push_back(s.c);
    s.trace.dH_rhs.push_back(flow_dH_rhs(s));
}

void step_inplace(FlowState& s, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    const int m = static_cast<int>(s.f.size());
    const double dy = s.y[1] - s.y[0];

    const std::vector<StencilRow>& d2rows = cached_d2_rows(s.y, s.L);
    const std::vector<StencilRow> d1lo = {StencilRow{0, fd_weights(s.y.front(),
                                                                   {s.y.begin(), s.y.begin() + 5},
                                                                   1)}};
    const std::vector<StencilRow> d1hi = {StencilRow{m - 5, fd_weights(s.y.back(),
                                                                       {s.y.end() - 5, s.y.end()},
                                                                       1)}};

    // backward Euler in the stiff term:
    //   f+ - dt log(D2 f+) = f + dt (f - c)
    std::vector<double> target(m);
    for (int i = 0; i < m; ++i) target[i] = s.f[i] + dt * (s.f[i] - s.c);

    std::vector<double> fp = s.f;
    Eigen::SparseMatrix<double> J(m, m);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

    auto reject = [&](const char* why) { throw StepRejected(why, dt / 2.0); };

    auto interior_convex = [&](const std::vector<double>& g) {
        for (int i = 1; i < m - 1; ++i)
            if (!(apply_row(d2rows[i], g) > 0.0)) return false;
        return true;
    };
    if (!interior_convex(fp)) reject("convexity lost before the step");

    bool converged = false;
    for (int it = 0; it < 30; ++it) {
        std::vector<double> d2(m);
        for (int i = 0; i < m; ++i) d2[i] = apply_row(d2rows[i], fp);
        Eigen::VectorXd G(m);
        G[0] = apply_row(d1lo[0], fp) - s.slope_lo;
        G[m - 1] = apply_row(d1hi[0], fp) - s.slope_hi;
        for (int i = 1; i < m - 1; ++i) G[i] = fp[i] - dt * std::log(d2[i]) - target[i];

        // The FD cancellation noise of d2 enters G through dt log(d2); where
        // d2 is exponentially small near the boundary this floors the
        // attainable residual, so each node gets a tolerance above its own
        // floor while the rest of the grid is held to 1e-11.
        bool within = true;
        for (int i = 0; i < m && within; ++i) {
            double noise = 0.0;
            if (i > 0 && i < m - 1) {
                double amp = 0.0;
                for (std::size_t k = 0; k < d2rows[i].w.size(); ++k)
                    amp += std::fabs(d2rows[i].w[k] * fp[d2rows[i].start + k]);
                noise = amp / d2[i];
            }
            const double tol =
                std::fmax(1e-11, 32.0 * dt * std::numeric_limits<double>::epsilon() * noise);
            within = std::fabs(G[i]) < tol;
        }
        if (within) {
            converged = true;
            break;
        }

        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t k = 0; k < d1lo[0].w.size(); ++k)
            trip.emplace_back(0, d1lo[0].start + static_cast<int>(k), d1lo[0].w[k]);
        for (std::size_t k = 0; k < d1hi[0].w.size(); ++k)
            trip.emplace_back(m - 1, d1hi[0].start + static_cast<int>(k), d1hi[0].w[k]);
        for (int i = 1; i < m - 1; ++i) {
            trip.emplace_back(i, i, 1.0);
            const double scale = -dt / d2[i];
            for (std::size_t k = 0; k < d2rows[i].w.size(); ++k)
                trip.emplace_back(i, d2rows[i].start + static_cast<int>(k),
                                  scale * d2rows[i].w[k]);
        }
        const bool first = J.nonZeros() == 0;
        J.setFromTriplets(trip.begin(), trip.end());
        if (first) lu.analyzePattern(J);
        lu.factorize(J);
        if (lu.info() != Eigen::Success) reject("Newton Jacobian factorization failed");
        const Eigen::VectorXd delta = lu.solve(-G);

        // backtrack until the iterate stays convex in the interior
        double scale = 1.0;
        std::vector<double> trial(m);
        bool placed = false;
        for (int bt = 0; bt < 8; ++bt, scale *= 0.5) {
            for (int i = 0; i < m; ++i) trial[i] = fp[i] + scale * delta[i];
            if (interior_convex(trial)) {
                fp = trial;
                placed = true;
                break;
            }
        }
        if (!placed) reject("convexity lost in Newton iterate");
    }
    if (!converged) reject("Newton iteration budget exhausted");

    // final convexity audit at interior nodes
    for (int i = 1; i < m - 1; ++i)
        if (!(apply_row(d2rows[i], fp) > 0.0)) reject("convexity lost after step");

    (void)dy;
    s.f = std::move(fp);
    s.t += dt;
    s.c = normalization_constant(s);
    append_monitors(s);
}

}  // namespace

FlowState make_flow_state(const SymplecticPotential& u0, double L, int m) {
    if (u0.model().n != 1) throw std::invalid_argument("the flow is implemented for n = 1 only");
    if (!(L > 0.0) || m < 16) throw std::invalid_argument("flow grid needs L > 0 and m >= 16");
    const ComplexPotential dual = legendre_dual(u0, L, m);
    FlowState s;
    s.model = u0.model_ptr();
    s.L = L;
    s.y = dual.grid;
    s.f = dual.values;
    s.slope_lo = dual.slope_lo;
    s.slope_hi = dual.slope_hi;
    s.t = 0.0;
    s.c = normalization_constant(s);
    return s;
}

std::vector<double> flow_h_values(const FlowState& s) {
    const std::vector<double> d2 = second_derivative(s);
    std::vector<double> h(s.f.size());
    for (std::size_t i = 0; i < s.f.size(); ++i) {
        if (!(d2[i] > 0.0)) throw DegenerateMetricError("flow potential lost convexity");
        h[i] = -(std::log(d2[i]) + s.f[i] - s.c);
    }
    return h;
}

double flow_H(const FlowState& s) {
    const double dy = s.y[1] - s.y[0];
    const std::vector<double> h = flow_h_values(s);
    std::vector<double> integrand(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) integrand[i] = h[i] * std::exp(s.c - s.f[i]);
    const double tails = integrand.front() / std::fabs(s.slope_lo) +
                         integrand.back() / s.slope_hi;
    return s.model->C_n * (simpson(integrand, dy) + tails);
}

double flow_sup_h(const FlowState& s) {
    const std::vector<double> h = flow_h_values(s);
    double m = 0.0;
    for (double v : h) m = std::fmax(m, std::fabs(v));
    return m;
}

double flow_dH_rhs(const FlowState& s) {
    const double dy = s.y[1] - s.y[0];
    const std::vector<double> h = flow_h_values(s);
    const std::vector<double> d2 = second_derivative(s);
    const std::vector<StencilRow> d1 = derivative_rows(s.y, 1);
    const double hbar = flow_H(s) / s.model->V;

    std::vector<double> integrand(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double hy = apply_row(d1[i], h);
        const double dev = h[i] - hbar;
        integrand[i] = (hy * hy / d2[i] - dev * dev) * std::exp(s.c - s.f[i]);
    }
    // tails: gradient term decays, the deviation term extends with frozen h
    auto dev_tail = [&](std::size_t i, double slope) {
        const double dev = h[i] - hbar;
        return -dev * dev * std::exp(s.c - s.f[i]) / std::fabs(slope);
    };
    const double tails = dev_tail(0, s.slope_lo) + dev_tail(h.size() - 1, s.slope_hi);
    return -s.model->C_n * (simpson(integrand, dy) + tails);
}

FlowState krf_step(const FlowState& s, double dt) {
    FlowState next = s;
    step_inplace(next, dt);
    return next;
}

double dH_dt_identity(const SymplecticPotential& u) {
    const ManifoldModel& m = u.model();
    const QuadratureRule& q = u.quad();
    const RicciPotential r = ricci_potential(u);
    const double hbar = m.C_n * q.integrate_product(r.h, r.eh) / m.V;

    std::vector<double> integrand(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Vec x = q.nodes[i];
        const Vec g = ricci_h_grad(u, x);
        const Mat U = inverse(u.jet(x).h, m.n);
        const double dev = r.h[i] - hbar;
        integrand[i] = dot(g, matvec(U, g, m.n), m.n) - dev * dev;
    }
    return -m.C_n * q.integrate_product(integrand, r.eh);
}

FlowState run_krf(const SymplecticPotential& u0, double T, double dt, double L, int m) {
    if (T < 0.0 || !(dt > 0.0)) throw std::invalid_argument("flow needs T >= 0 and dt > 0");
    FlowState s = make_flow_state(u0, L, m);
    append_monitors(s);
    if (T == 0.0) return s;

    double dt_cur = dt;
    int halvings = 0;
    int successes = 0;
    while (s.t < T - 1e-12) {
        const double step = std::fmin(dt_cur, T - s.t);
        try {
            step_inplace(s, step);
        } catch (const StepRejected& e) {
            if (++halvings > 10) throw;
            dt_cur = e.suggested_dt;
            successes = 0;
            continue;
        }
        halvings = 0;
        // recover toward the requested dt after a stable stretch
        if (dt_cur < dt && ++successes >= 50) {
            dt_cur = std::fmin(2.0 * dt_cur, dt);
            successes = 0;
        }
    }
    return s;
}

}  // namespace kahlerlab
