#include "kahlerlab/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "kahlerlab/kernels.hpp"

namespace kahlerlab {

ModelName model_from_string(const std::string& s) {
    if (s == "CP1") return ModelName::CP1;
    if (s == "Hirzebruch1") return ModelName::Hirzebruch1;
    throw std::invalid_argument("unknown model: " + s);
}

std::string to_string(ModelName m) {
    return m == ModelName::CP1 ? "CP1" : "Hirzebruch1";
}

double Polytope::facet_value(std::size_t k, const Vec& x) const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v += facets[k].normal[i] * x[i];
    return v;
}

double Polytope::interior_margin(const Vec& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < facets.size(); ++k) m = std::fmin(m, facet_value(k, x));
    return m;
}

double Polytope::volume() const {
    if (dim == 1) return vertices[1][0] - vertices[0][0];
    // shoelace over the (counterclockwise) vertex list
    double a = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = vertices[i];
        const Vec& q = vertices[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return a / 2.0;
}

Vec Polytope::barycenter() const {
    if (dim == 1) return Vec{(vertices[0][0] + vertices[1][0]) / 2.0, 0.0};
    double a = 0.0;
    Vec c{0.0, 0.0};
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = vertices[i];
        const Vec& q = vertices[(i + 1) % n];
        const double cross = p[0] * q[1] - q[0] * p[1];
        a += cross;
        c[0] += (p[0] + q[0]) * cross;
        c[1] += (p[1] + q[1]) * cross;
    }
    c[0] /= 3.0 * a;
    c[1] /= 3.0 * a;
    return c;
}

void Polytope::validate() const {
    if (dim < 1 || dim > 2) throw std::invalid_argument("polytope dim must be 1 or 2");
    constexpr double tol = 1e-12;
    for (const Vec& v : vertices) {
        int active = 0;
        for (std::size_t k = 0; k < facets.size(); ++k) {
            const double val = facet_value(k, v);
            if (val < -tol) throw std::invalid_argument("vertex violates a facet inequality");
            if (std::fabs(val) <= tol) ++active;
        }
        if (active != dim) throw std::invalid_argument("vertex not on exactly dim facets");
    }
}

Polytope build_model(ModelName name) {
    Polytope p;
    if (name == ModelName::CP1) {
        p.dim = 1;
        p.facets = {Facet{{1, 0}}, Facet{{-1, 0}}};
        p.vertices = {Vec{-1.0, 0.0}, Vec{1.0, 0.0}};
    } else {
        p.dim = 2;
        p.facets = {Facet{{1, 0}}, Facet{{0, 1}}, Facet{{-1, 1}}, Facet{{0, -1}}};
        p.vertices = {Vec{-1.0, -1.0}, Vec{0.0, -1.0}, Vec{2.0, 1.0}, Vec{-1.0, 1.0}};
    }
    p.validate();
    return p;
}

double QuadratureRule::integrate(const std::vector<double>& f) const {
    if (f.size() != weights.size()) throw std::invalid_argument("integrand/rule size mismatch");
    return kernels::dot(weights.data(), f.data(), f.size());
}

double QuadratureRule::integrate_product(const std::vector<double>& f,
                                         const std::vector<double>& g) const {
    if (f.size() != weights.size() || g.size() != weights.size())
        throw std::invalid_argument("integrand/rule size mismatch");
    return kernels::dot3(weights.data(), f.data(), g.data(), f.size());
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton on P_n with the Chebyshev-like initial guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

namespace {

Vec cell_centroid(const std::vector<Vec>& poly) {
    double a = 0.0;
    Vec c{0.0, 0.0};
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = poly[i];
        const Vec& q = poly[(i + 1) % n];
        const double cross = p[0] * q[1] - q[0] * p[1];
        a += cross;
        c[0] += (p[0] + q[0]) * cross;
        c[1] += (p[1] + q[1]) * cross;
    }
    c[0] /= 3.0 * a;
    c[1] /= 3.0 * a;
    return c;
}

double cell_area(const std::vector<Vec>& poly) {
    double a = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = poly[i];
        const Vec& q = poly[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return a / 2.0;
}

}  // namespace

std::vector<std::vector<Vec>> split_cells(int dim, const std::vector<std::vector<Vec>>& cells,
                                          const Vec& a, double c) {
    constexpr double kSliver = 1e-12;
    std::vector<std::vector<Vec>> out;
    for (const std::vector<Vec>& cell : cells) {
        if (dim == 1) {
            if (std::fabs(a[0]) < kSliver) {
                out.push_back(cell);
                continue;
            }
            const double x = c / a[0];
            const double lo = cell[0][0], hi = cell[1][0];
            if (x <= lo + kSliver || x >= hi - kSliver) {
                out.push_back(cell);
            } else {
                out.push_back({Vec{lo, 0.0}, Vec{x, 0.0}});
                out.push_back({Vec{x, 0.0}, Vec{hi, 0.0}});
            }
            continue;
        }
        std::vector<Vec> below, above;
        const std::size_t n = cell.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec& p = cell[i];
            const Vec& q = cell[(i + 1) % n];
            const double sp = a[0] * p[0] + a[1] * p[1] - c;
            const double sq = a[0] * q[0] + a[1] * q[1] - c;
            if (sp <= 0.0) below.push_back(p);
            if (sp >= 0.0) above.push_back(p);
            if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
                const double w = sp / (sp - sq);
                const Vec m{p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])};
                below.push_back(m);
                above.push_back(m);
            }
        }
        const double area = std::fabs(cell_area(cell));
        const std::size_t before = out.size();
        for (std::vector<Vec>* piece : {&below, &above}) {
            if (piece->size() >= 3 && std::fabs(cell_area(*piece)) > kSliver * area)
                out.push_back(std::move(*piece));
        }
        if (out.size() == before) out.push_back(cell);
    }
    return out;
}

QuadratureRule cell_quadrature(int dim, const std::vector<std::vector<Vec>>& cells,
                               int points_per_axis) {
    if (points_per_axis < 1) throw std::invalid_argument("quadrature order must be >= 1");
    QuadratureRule rule;
    rule.dim = dim;
    rule.order = dim == 1 ? 2 * points_per_axis - 1 : 2 * points_per_axis - 2;

    std::vector<double> gx, gw;
    gauss_legendre(points_per_axis, gx, gw);

    for (const std::vector<Vec>& cell : cells) {
        if (dim == 1) {
            const double a = cell[0][0];
            const double b = cell[1][0];
            for (int i = 0; i < points_per_axis; ++i) {
                rule.nodes.push_back(Vec{(a + b) / 2.0 + (b - a) / 2.0 * gx[i], 0.0});
                rule.weights.push_back((b - a) / 2.0 * gw[i]);
            }
            continue;
        }
        const Vec c = cell_centroid(cell);
        const std::size_t nv = cell.size();
        for (std::size_t t = 0; t < nv; ++t) {
            const Vec& a = cell[t];
            const Vec& b = cell[(t + 1) % nv];
            const double jac2 = (a[0] - c[0]) * (b[1] - c[1]) - (b[0] - c[0]) * (a[1] - c[1]);
            // collapsed-square map of [0,1]^2 onto the triangle (c, a, b):
            // (s, t) -> c + s (a - c) + t (1 - s) (b - c), Jacobian (1 - s) |jac2|
            for (int i = 0; i < points_per_axis; ++i) {
                const double s = (gx[i] + 1.0) / 2.0;
                for (int j = 0; j < points_per_axis; ++j) {
                    const double u = (gx[j] + 1.0) / 2.0;
                    const double tt = u * (1.0 - s);
                    Vec x{c[0] + s * (a[0] - c[0]) + tt * (b[0] - c[0]),
                          c[1] + s * (a[1] - c[1]) + tt * (b[1] - c[1])};
                    rule.nodes.push_back(x);
                    rule.weights.push_back(gw[i] / 2.0 * gw[j] / 2.0 * (1.0 - s) *
                                           std::fabs(jac2));
                }
            }
        }
    }
    return rule;
}

QuadratureRule quadrature(const Polytope& p, int points_per_axis) {
    return cell_quadrature(p.dim, {p.vertices}, points_per_axis);
}

Moments polytope_moments(const Polytope& p, const Vec& b, int points_per_axis) {
    const QuadratureRule rule = quadrature(p, points_per_axis);
    Moments m;
    std::vector<double> f(rule.size()), x0(rule.size()), x1(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
        f[i] = std::exp(dot(b, rule.nodes[i], p.dim));
        x0[i] = rule.nodes[i][0];
        x1[i] = rule.nodes[i][1];
    }
    m.mass = rule.integrate(f);
    m.first[0] = rule.integrate_product(f, x0);
    if (p.dim == 2) m.first[1] = rule.integrate_product(f, x1);
    return m;
}

void to_json(nlohmann::json& j, const Polytope& p) {
    j = nlohmann::json::object();
    j["dim"] = p.dim;
    auto normals = nlohmann::json::array();
    for (const Facet& f : p.facets) {
        auto n = nlohmann::json::array();
        for (int i = 0; i < p.dim; ++i) n.push_back(f.normal[i]);
        normals.push_back(n);
    }
    j["normals"] = normals;
    auto verts = nlohmann::json::array();
    for (const Vec& v : p.vertices) {
        auto vv = nlohmann::json::array();
        for (int i = 0; i < p.dim; ++i) vv.push_back(v[i]);
        verts.push_back(vv);
    }
    j["vertices"] = verts;
}

void from_json(const nlohmann::json& j, Polytope& p) {
    p.dim = j.at("dim").get<int>();
    p.facets.clear();
    for (const auto& n : j.at("normals")) {
        Facet f;
        for (int i = 0; i < p.dim; ++i) f.normal[i] = n.at(i).get<int>();
        p.facets.push_back(f);
    }
    p.vertices.clear();
    for (const auto& v : j.at("vertices")) {
        Vec x{0.0, 0.0};
        for (int i = 0; i < p.dim; ++i) x[i] = v.at(i).get<double>();
        p.vertices.push_back(x);
    }
    p.validate();
}

}  // namespace kahlerlab
