#include "kahlerlab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace kahlerlab {

Jet& Jet::add_scaled(const Jet& o, double s) {
    val += s * o.val;
    for (int i = 0; i < 2; ++i) g[i] += s * o.g[i];
    for (int i = 0; i < 4; ++i) h[i] += s * o.h[i];
    for (int i = 0; i < 8; ++i) t3[i] += s * o.t3[i];
    for (int i = 0; i < 16; ++i) t4[i] += s * o.t4[i];
    return *this;
}

// ---------------------------------------------------------------- Poly2

Poly2::Poly2(int dim, int degree) : dim_(dim), deg_(degree) {
    if (dim < 1 || dim > 2 || degree < 0) throw std::invalid_argument("bad Poly2 shape");
    c_.assign(static_cast<std::size_t>(degree + 1) * (degree + 1), 0.0);
}

double& Poly2::coeff(int i, int j) {
    if (i < 0 || j < 0 || i + j > deg_ || (dim_ == 1 && j != 0))
        throw std::out_of_range("Poly2 coefficient index");
    return c_[static_cast<std::size_t>(i) * (deg_ + 1) + j];
}

double Poly2::coeff(int i, int j) const {
    return const_cast<Poly2*>(this)->coeff(i, j);
}

Poly2& Poly2::operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
}

namespace {

double falling(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= n - i;
    return r;
}

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

Poly2 poly_mul(const Poly2& a, const Poly2& b) {
    Poly2 r(a.dim(), a.degree() + b.degree());
    for (int i = 0; i <= a.degree(); ++i)
        for (int j = 0; i + j <= a.degree() && j <= (a.dim() == 1 ? 0 : a.degree()); ++j) {
            const double ca = a.coeff(i, j);
            if (ca == 0.0) continue;
            for (int k = 0; k <= b.degree(); ++k)
                for (int l = 0; k + l <= b.degree() && l <= (b.dim() == 1 ? 0 : b.degree()); ++l) {
                    const double cb = b.coeff(k, l);
                    if (cb != 0.0) r.coeff(i + k, j + l) += ca * cb;
                }
        }
    return r;
}

}  // namespace

double Poly2::value(const Vec& x) const {
    double v = 0.0;
    for (int i = 0; i <= deg_; ++i)
        for (int j = 0; i + j <= deg_ && j <= (dim_ == 1 ? 0 : deg_); ++j) {
            const double c = c_[static_cast<std::size_t>(i) * (deg_ + 1) + j];
            if (c != 0.0) v += c * ipow(x[0], i) * ipow(x[1], j);
        }
    return v;
}

Jet Poly2::jet(const Vec& x) const {
    double D[5][5] = {};
    for (int i = 0; i <= deg_; ++i)
        for (int j = 0; i + j <= deg_ && j <= (dim_ == 1 ? 0 : deg_); ++j) {
            const double c = c_[static_cast<std::size_t>(i) * (deg_ + 1) + j];
            if (c == 0.0) continue;
            for (int a = 0; a <= std::min(4, i); ++a)
                for (int b = 0; a + b <= 4 && b <= j; ++b)
                    D[a][b] += c * falling(i, a) * falling(j, b) * ipow(x[0], i - a) *
                               ipow(x[1], j - b);
        }
    Jet J;
    J.val = D[0][0];
    for (int a = 0; a < dim_; ++a) J.g[a] = D[a == 0][a == 1];
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b)
            J.h[a * 2 + b] = D[(a == 0) + (b == 0)][(a == 1) + (b == 1)];
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b)
            for (int c = 0; c < dim_; ++c)
                J.t3[(a * 2 + b) * 2 + c] =
                    D[(a == 0) + (b == 0) + (c == 0)][(a == 1) + (b == 1) + (c == 1)];
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b)
            for (int c = 0; c < dim_; ++c)
                for (int d = 0; d < dim_; ++d)
                    J.t4[((a * 2 + b) * 2 + c) * 2 + d] =
                        D[(a == 0) + (b == 0) + (c == 0) + (d == 0)]
                         [(a == 1) + (b == 1) + (c == 1) + (d == 1)];
    return J;
}

Poly2 Poly2::boundary_bump(const Polytope& p, const std::vector<double>& coeffs) {
    // smallest degree whose graded basis holds all supplied coefficients
    int deg = 0;
    auto basis_size = [&](int d) {
        return p.dim == 1 ? d + 1 : (d + 1) * (d + 2) / 2;
    };
    while (basis_size(deg) < static_cast<int>(coeffs.size())) ++deg;

    Poly2 q(p.dim, deg);
    std::size_t idx = 0;
    for (int d = 0; d <= deg && idx < coeffs.size(); ++d) {
        if (p.dim == 1) {
            q.coeff(d, 0) = coeffs[idx++];
        } else {
            for (int i = d; i >= 0 && idx < coeffs.size(); --i) q.coeff(i, d - i) = coeffs[idx++];
        }
    }

    Poly2 r = q;
    for (const Facet& f : p.facets) {
        Poly2 ell(p.dim, 1);
        ell.coeff(0, 0) = 1.0;
        ell.coeff(1, 0) = f.normal[0];
        if (p.dim == 2) ell.coeff(0, 1) = f.normal[1];
        r = poly_mul(r, ell);
    }
    return r;
}

// ------------------------------------------------------------ directions

namespace {

// C^2 fillet of the hinge max(0, s): cubic blend on [-delta, delta]
void hinge_profile(double s, double delta, double q[5]) {
    if (s <= -delta) {
        q[0] = q[1] = q[2] = q[3] = q[4] = 0.0;
    } else if (s >= delta) {
        q[0] = s;
        q[1] = 1.0;
        q[2] = q[3] = q[4] = 0.0;
    } else {
        const double d3 = 16.0 * delta * delta * delta;
        const double sp = s + delta;
        q[0] = sp * sp * sp * (3.0 * delta - s) / d3;
        q[1] = sp * sp * 4.0 * (2.0 * delta - s) / d3;
        q[2] = 12.0 * sp * (delta - s) / d3;
        q[3] = -24.0 * s / d3;
        q[4] = -24.0 / d3;
    }
}

Jet tensor_jet(const Vec& a, const double q[5], int dim) {
    Jet J;
    J.val = q[0];
    for (int i = 0; i < dim; ++i) J.g[i] = q[1] * a[i];
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) J.h[i * 2 + j] = q[2] * a[i] * a[j];
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k) J.t3[(i * 2 + j) * 2 + k] = q[3] * a[i] * a[j] * a[k];
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k)
                for (int l = 0; l < dim; ++l)
                    J.t4[((i * 2 + j) * 2 + k) * 2 + l] = q[4] * a[i] * a[j] * a[k] * a[l];
    return J;
}

}  // namespace

Jet direction_jet(const Direction& d, const Vec& x, int dim) {
    if (const auto* aff = std::get_if<AffineDirection>(&d)) {
        double q[5] = {aff->b + dot(aff->a, x, dim), 1.0, 0.0, 0.0, 0.0};
        return tensor_jet(aff->a, q, dim);
    }
    if (const auto* hin = std::get_if<HingeDirection>(&d)) {
        const double s = hin->b + dot(hin->a, x, dim);
        double q[5];
        hinge_profile(s, hin->delta, q);
        return tensor_jet(hin->a, q, dim);
    }
    return std::get<PolyDirection>(d).p.jet(x);
}

double direction_value(const Direction& d, const Vec& x, int dim) {
    if (const auto* aff = std::get_if<AffineDirection>(&d)) return aff->b + dot(aff->a, x, dim);
    if (const auto* hin = std::get_if<HingeDirection>(&d)) {
        double q[5];
        hinge_profile(hin->b + dot(hin->a, x, dim), hin->delta, q);
        return q[0];
    }
    return std::get<PolyDirection>(d).p.value(x);
}

// ----------------------------------------------------------------- model

std::shared_ptr<const ManifoldModel> make_model(ModelName name, int quad_points) {
    auto m = std::make_shared<ManifoldModel>();
    m->name = name;
    m->polytope = build_model(name);
    m->n = m->polytope.dim;
    m->C_n = 1.0;
    for (int i = 1; i <= m->n; ++i) m->C_n *= 2.0 * std::numbers::pi * i;
    m->vol = m->polytope.volume();
    m->V = m->C_n * m->vol;
    m->quad_points = quad_points;
    m->quad = quadrature(m->polytope, quad_points);
    return m;
}

// ------------------------------------------------------------- potential

SymplecticPotential::SymplecticPotential(std::shared_ptr<const ManifoldModel> model, Poly2 psi)
    : model_(std::move(model)), psi_(std::move(psi)) {
    if (!model_) throw std::invalid_argument("null model");
    if (psi_.dim() != model_->n) {
        if (psi_.degree() == 0 && psi_.value(kZeroVec) == 0.0)
            psi_ = Poly2(model_->n, 0);
        else
            throw std::invalid_argument("psi dimension does not match the model");
    }
}

Jet SymplecticPotential::jet(const Vec& x) const {
    const Polytope& p = model_->polytope;
    const int dim = p.dim;
    Jet J;
    for (std::size_t k = 0; k < p.facets.size(); ++k) {
        const double ell = p.facet_value(k, x);
        if (!(ell > 0.0))
            throw DegenerateMetricError("potential jet requested outside the open polytope");
        const auto& n = p.facets[k].normal;
        J.val += ell * std::log(ell);
        const double lg = std::log(ell) + 1.0;
        for (int a = 0; a < dim; ++a) J.g[a] += n[a] * lg;
        const double i1 = 1.0 / ell, i2 = i1 * i1, i3 = i2 * i1;
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) {
                const double nab = static_cast<double>(n[a]) * n[b];
                J.h[a * 2 + b] += nab * i1;
                for (int c = 0; c < dim; ++c) {
                    const double nabc = nab * n[c];
                    J.t3[(a * 2 + b) * 2 + c] -= nabc * i2;
                    for (int d = 0; d < dim; ++d)
                        J.t4[((a * 2 + b) * 2 + c) * 2 + d] += 2.0 * nabc * n[d] * i3;
                }
            }
    }
    if (psi_.dim() == dim) J.add_scaled(psi_.jet(x), 1.0);
    for (const auto& [coef, dir] : dirs_) J.add_scaled(direction_jet(dir, x, dim), coef);
    return J;
}

double SymplecticPotential::value(const Vec& x) const {
    const Polytope& p = model_->polytope;
    double v = 0.0;
    for (std::size_t k = 0; k < p.facets.size(); ++k) {
        const double ell = p.facet_value(k, x);
        if (!(ell > 0.0))
            throw DegenerateMetricError("potential value requested outside the open polytope");
        v += ell * std::log(ell);
    }
    if (psi_.dim() == p.dim) v += psi_.value(x);
    for (const auto& [coef, dir] : dirs_) v += coef * direction_value(dir, x, p.dim);
    return v;
}

SymplecticPotential SymplecticPotential::with_direction(const Direction& v, double coef) const {
    SymplecticPotential r = *this;
    r.dirs_.emplace_back(coef, v);
    r.rebuild_quadrature();
    return r;
}

void SymplecticPotential::rebuild_quadrature() {
    std::vector<std::vector<Vec>> cells{model_->polytope.vertices};
    bool cut = false;
    for (const auto& [coef, dir] : dirs_) {
        const HingeDirection* h = std::get_if<HingeDirection>(&dir);
        if (!h) continue;
        cells = split_cells(model_->n, cells, h->a, -h->b - h->delta);
        cells = split_cells(model_->n, cells, h->a, -h->b + h->delta);
        cut = true;
    }
    if (!cut) {
        quad_.reset();
        return;
    }
    quad_ = std::make_shared<const QuadratureRule>(
        cell_quadrature(model_->n, cells, model_->quad_points));
}

double SymplecticPotential::hessian_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (const Vec& x : quad().nodes) m = std::fmin(m, min_eigenvalue(jet(x).h, model_->n));
    return m;
}

void SymplecticPotential::require_valid() const {
    if (!(hessian_margin() > 0.0))
        throw DegenerateMetricError("symplectic potential Hessian is not positive definite");
}

// --------------------------------------------------------- Ricci potential

double ricci_h0_value(const SymplecticPotential& u, const Vec& x) {
    const Jet J = u.jet(x);
    const int dim = u.model().n;
    const double d = det(J.h, dim);
    if (!(d > 0.0)) throw DegenerateMetricError("det D2u <= 0 at a quadrature node");
    return std::log(d) - dot(x, J.g, dim) + J.val;
}

double RicciPotential::sup_abs() const {
    double m = 0.0;
    for (double v : h) m = std::fmax(m, std::fabs(v));
    return m;
}

RicciPotential ricci_potential(const SymplecticPotential& u) {
    const QuadratureRule& q = u.quad();
    RicciPotential r;
    r.h.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) r.h[i] = ricci_h0_value(u, q.nodes[i]);

    // c = log vol - log int e^{h0}, evaluated with a max shift
    const double M = *std::max_element(r.h.begin(), r.h.end());
    std::vector<double> shifted(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) shifted[i] = std::exp(r.h[i] - M);
    const double mass = q.integrate(shifted);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw NumericalOverflow("normalization integral of e^h is not finite");
    r.c = std::log(u.model().vol) - M - std::log(mass);

    r.eh.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        r.h[i] += r.c;
        r.eh[i] = std::exp(r.h[i]);
        if (!std::isfinite(r.eh[i])) throw NumericalOverflow("e^h overflowed at a node");
    }
    return r;
}

Vec ricci_h_grad(const SymplecticPotential& u, const Vec& x) {
    const Jet J = u.jet(x);
    const int dim = u.model().n;
    const Mat U = inverse(J.h, dim);
    Vec g{0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += U[i * 2 + j] * J.t3[(i * 2 + j) * 2 + a];
        for (int c = 0; c < dim; ++c) s -= J.h[a * 2 + c] * x[c];
        g[a] = s;
    }
    return g;
}

double ricci_h_laplacian(const SymplecticPotential& u, const Vec& x) {
    const Jet J = u.jet(x);
    const int dim = u.model().n;
    const Mat U = inverse(J.h, dim);

    Vec hg{0.0, 0.0};  // grad h
    for (int a = 0; a < dim; ++a) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += U[i * 2 + j] * J.t3[(i * 2 + j) * 2 + a];
        for (int c = 0; c < dim; ++c) s -= J.h[a * 2 + c] * x[c];
        hg[a] = s;
    }

    // h_{ab} = -U_{ik} U_{lj} T_{klb} T_{ija} + U_{ij} F_{ijab} - T_{abc} x_c - H_{ab}
    Mat hh{0.0, 0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
            double s = 0.0;
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) {
                    s += U[i * 2 + j] * J.t4[((i * 2 + j) * 2 + a) * 2 + b];
                    for (int k = 0; k < dim; ++k)
                        for (int l = 0; l < dim; ++l)
                            s -= U[i * 2 + k] * U[l * 2 + j] * J.t3[(k * 2 + l) * 2 + b] *
                                 J.t3[(i * 2 + j) * 2 + a];
                }
            for (int c = 0; c < dim; ++c) s -= J.t3[(a * 2 + b) * 2 + c] * x[c];
            s -= J.h[a * 2 + b];
            hh[a * 2 + b] = s;
        }

    // divergence form: Delta h = U_{ab} h_{ab} + (sum_a d_a U_{ab}) h_b,
    // with d_a U_{ab} = -U_{ai} T_{ija} U_{jb}
    double lap = 0.0;
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) lap += U[a * 2 + b] * hh[a * 2 + b];
    for (int b = 0; b < dim; ++b) {
        double divU = 0.0;
        for (int a = 0; a < dim; ++a)
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    divU -= U[a * 2 + i] * J.t3[(i * 2 + j) * 2 + a] * U[j * 2 + b];
        lap += divU * hg[b];
    }
    return lap;
}

std::vector<double> grad_pairing(const std::vector<Vec>& grad_a, const std::vector<Vec>& grad_b,
                                 const SymplecticPotential& u) {
    const QuadratureRule& q = u.quad();
    if (grad_a.size() != q.size() || grad_b.size() != q.size())
        throw std::invalid_argument("gradient arrays must match the quadrature grid");
    std::vector<double> out(q.size());
    const int dim = u.model().n;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Mat U = inverse(u.jet(q.nodes[i]).h, dim);
        out[i] = dot(grad_a[i], matvec(U, grad_b[i], dim), dim);
    }
    return out;
}

// -------------------------------------------------------- Legendre duality

double legendre_argmax(const SymplecticPotential& u, double y) {
    if (u.model().n != 1) throw std::invalid_argument("legendre_argmax is 1D only");
    const Polytope& p = u.model().polytope;
    double lo = p.vertices[0][0];
    double hi = p.vertices[1][0];
    // g(x) = u'(x) - y is increasing with g -> -inf / +inf at the endpoints
    double x = 0.5 * (lo + hi);
    double best = x, best_res = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const Jet J = u.jet(Vec{x, 0.0});
        const double g = J.g[0] - y;
        if (std::fabs(g) < best_res) {
            best = x;
            best_res = std::fabs(g);
        }
        if (std::fabs(g) < 1e-12 * std::fmax(1.0, std::fabs(y))) return x;
        if (g > 0.0)
            hi = x;
        else
            lo = x;
        if (hi - lo < 4.0 * std::numeric_limits<double>::epsilon() * std::fmax(1.0, std::fabs(x)))
            return best;
        double xn = x - g / J.h[0];
        if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
        x = xn;
    }
    throw ConvergenceFailure("legendre_argmax did not converge", best_res);
}

ComplexPotential legendre_dual(const SymplecticPotential& u, double L, int m) {
    if (u.model().n != 1) throw std::invalid_argument("legendre_dual is 1D only");
    if (m < 2) throw std::invalid_argument("legendre_dual needs at least 2 grid points");
    ComplexPotential f;
    f.model = u.model_ptr();
    f.L = L;
    f.grid.resize(m);
    f.values.resize(m);
    const double dy = 2.0 * L / (m - 1);
    for (int i = 0; i < m; ++i) {
        const double y = -L + i * dy;
        const double x = legendre_argmax(u, y);
        f.grid[i] = y;
        f.values[i] = x * y - u.value(Vec{x, 0.0});
    }
    f.slope_lo = legendre_argmax(u, -L);
    f.slope_hi = legendre_argmax(u, L);
    const SymplecticPotential uc = u;
    f.eval = [uc](double y) {
        const double x = legendre_argmax(uc, y);
        return x * y - uc.value(Vec{x, 0.0});
    };
    f.eval_slope = [uc](double y) { return legendre_argmax(uc, y); };
    return f;
}

double dual_back(const ComplexPotential& f, double x) {
    if (!f.eval || !f.eval_slope) throw std::invalid_argument("dual_back needs an exact evaluator");
    // f' is increasing onto the open polytope interval; bracket then bisect
    double lo = -1.0, hi = 1.0;
    while (f.eval_slope(lo) > x) lo *= 2.0;
    while (f.eval_slope(hi) < x) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::fmax(1.0, std::fabs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (f.eval_slope(mid) < x ? lo : hi) = mid;
    }
    const double y = 0.5 * (lo + hi);
    return x * y - f.eval(y);
}

// ----------------------------------------------------------------- catalog

Poly2 psi_from_catalog(const Polytope& p, const std::string& id,
                       const std::vector<double>& coefficients) {
    if (id == "zero") {
        if (!coefficients.empty()) throw std::invalid_argument("psi 'zero' takes no coefficients");
        return Poly2(p.dim, 0);
    }
    if (id == "bump_poly") {
        if (coefficients.empty()) throw std::invalid_argument("psi 'bump_poly' needs coefficients");
        return Poly2::boundary_bump(p, coefficients);
    }
    throw std::invalid_argument("unknown psi id: " + id);
}

std::vector<SymplecticPotential> random_catalog_metrics(
    const std::shared_ptr<const ManifoldModel>& model, int count, unsigned long long seed,
    double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-amplitude, amplitude);
    const int ncoef = model->n == 1 ? 3 : 6;
    std::vector<SymplecticPotential> out;
    out.reserve(count);
    while (static_cast<int>(out.size()) < count) {
        std::vector<double> c(ncoef);
        for (double& v : c) v = unif(rng);
        for (int attempt = 0; attempt < 60; ++attempt) {
            SymplecticPotential u(model, Poly2::boundary_bump(model->polytope, c));
            if (u.hessian_margin() > 0.0) {
                out.push_back(std::move(u));
                break;
            }
            for (double& v : c) v /= 2.0;
        }
    }
    return out;
}

void metric_to_json(nlohmann::json& j, ModelName name, const std::string& psi_id,
                    const std::vector<double>& coefficients) {
    j = nlohmann::json::object();
    j["model"] = to_string(name);
    j["psi"] = {{"id", psi_id}, {"coefficients", coefficients}};
}

}  // namespace kahlerlab
