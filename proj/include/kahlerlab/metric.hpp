#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/geometry.hpp"
#include "kahlerlab/linalg.hpp"

#include <json.hpp>

namespace kahlerlab {

/// Derivatives of a scalar field at a point, up to fourth order.
struct Jet {
    double val = 0.0;
    Vec g{0.0, 0.0};
    Mat h{0.0, 0.0, 0.0, 0.0};
    Ten3 t3{};
    Ten4 t4{};

    Jet& add_scaled(const Jet& o, double s);
};

/// Dense polynomial in <= 2 variables, coeff(i, j) * x^i * y^j, i + j <= degree.
class Poly2 {
  public:
    Poly2() = default;
    Poly2(int dim, int degree);

    int dim() const { return dim_; }
    int degree() const { return deg_; }
    double& coeff(int i, int j);
    double coeff(int i, int j) const;

    double value(const Vec& x) const;
    Jet jet(const Vec& x) const;
    Poly2& operator*=(double s);

    /// psi = scale * prod_k ell_k(x) * (polynomial with `coeffs` over the
    /// graded monomial basis 1, x, y, x^2, xy, y^2, ...).
    static Poly2 boundary_bump(const Polytope& p, const std::vector<double>& coeffs);

  private:
    int dim_ = 1;
    int deg_ = 0;
    std::vector<double> c_{0.0};  // index (i, j) -> i * (deg_ + 1) + j
};

/// Convex direction function for geodesic rays.
struct AffineDirection {
    Vec a{0.0, 0.0};
    double b = 0.0;
};
struct HingeDirection {  // C^2 fillet of max(0, <a,x> + b), fillet half-width delta
    Vec a{0.0, 0.0};
    double b = 0.0;
    double delta = 1e-2;
};
struct PolyDirection {
    Poly2 p;
};
using Direction = std::variant<AffineDirection, HingeDirection, PolyDirection>;

Jet direction_jet(const Direction& d, const Vec& x, int dim);
double direction_value(const Direction& d, const Vec& x, int dim);

/// Toric model with all integral conventions fixed.
struct ManifoldModel {
    ModelName name = ModelName::CP1;
    Polytope polytope;
    int n = 1;          // complex dimension = polytope dim
    double C_n = 0.0;   // (2 pi)^n n!
    double vol = 0.0;   // Lebesgue volume of the polytope
    double V = 0.0;     // C_n * vol
    int quad_points = 24;
    QuadratureRule quad;
};

std::shared_ptr<const ManifoldModel> make_model(ModelName name, int quad_points = 24);

/// u(x) = sum_k ell_k log ell_k + psi(x) + sum_i coef_i * v_i(x).
class SymplecticPotential {
  public:
    SymplecticPotential() = default;
    explicit SymplecticPotential(std::shared_ptr<const ManifoldModel> model, Poly2 psi = {});

    const ManifoldModel& model() const { return *model_; }
    std::shared_ptr<const ManifoldModel> model_ptr() const { return model_; }
    const Poly2& psi() const { return psi_; }

    Jet jet(const Vec& x) const;
    double value(const Vec& x) const;

    /// Integration rule for this potential: the model rule, refined along the
    /// fillet edges of any attached hinge direction (the measure e^h piles up
    /// mass inside the fillet strip, which a polytope-wide rule cannot see).
    const QuadratureRule& quad() const { return quad_ ? *quad_ : model_->quad; }

    /// u + coef * v as a new potential on the same model.
    SymplecticPotential with_direction(const Direction& v, double coef) const;

    /// min over quadrature nodes of the smallest Hessian eigenvalue.
    double hessian_margin() const;
    /// throws DegenerateMetricError unless the Hessian is PD at every node.
    void require_valid() const;

  private:
    void rebuild_quadrature();

    std::shared_ptr<const ManifoldModel> model_;
    Poly2 psi_;
    std::vector<std::pair<double, Direction>> dirs_;
    std::shared_ptr<const QuadratureRule> quad_;
};

/// Ricci potential h = log det D2u - <x, grad u> + u + c on the quadrature
/// grid, with int_P e^h = vol(P).
struct RicciPotential {
    std::vector<double> h;   // at quadrature nodes
    std::vector<double> eh;  // e^{h}
    double c = 0.0;
    double sup_abs() const;
};

RicciPotential ricci_potential(const SymplecticPotential& u);

/// Unnormalized h0 = log det D2u - <x, grad u> + u at one point.
double ricci_h0_value(const SymplecticPotential& u, const Vec& x);
/// grad h (independent of the normalization constant).
Vec ricci_h_grad(const SymplecticPotential& u, const Vec& x);
/// Riemannian Laplacian of h: div-form contraction against (D2u)^{-1}.
double ricci_h_laplacian(const SymplecticPotential& u, const Vec& x);

/// Pointwise metric pairing <grad a, grad b>_g = (Da)^T (D2u)^{-1} (Db) at the
/// quadrature nodes; a and b are supplied with gradients.
std::vector<double> grad_pairing(const std::vector<Vec>& grad_a, const std::vector<Vec>& grad_b,
                                 const SymplecticPotential& u);

/// Invariant Kahler potential in complex log coordinates (n = 1 only):
/// f(y) = sup_x (x y - u(x)) on a uniform grid over [-L, L].
struct ComplexPotential {
    std::shared_ptr<const ManifoldModel> model;
    double L = 0.0;
    std::vector<double> grid;    // y values
    std::vector<double> values;  // f(y)
    double slope_lo = 0.0;       // f'(-L)
    double slope_hi = 0.0;       // f'(+L)

    // exact evaluator (inner Newton on the defining sup), set by legendre_dual
    std::function<double(double)> eval;        // f(y)
    std::function<double(double)> eval_slope;  // f'(y) = argmax x
};

ComplexPotential legendre_dual(const SymplecticPotential& u, double L, int m);

/// Value of sup_y (x y - f(y)) using the exact evaluator (roundtrip check).
double dual_back(const ComplexPotential& f, double x);

/// Inner problem of the Legendre transform: argmax_x (x y - u(x)).
double legendre_argmax(const SymplecticPotential& u, double y);

/// Named psi catalog: "zero" or "bump_poly" (coefficients over the graded
/// monomial basis, multiplied by the boundary-vanishing product of facets).
Poly2 psi_from_catalog(const Polytope& p, const std::string& id,
                       const std::vector<double>& coefficients);

/// Seeded family of valid perturbed metrics used by the property suites.
std::vector<SymplecticPotential> random_catalog_metrics(
    const std::shared_ptr<const ManifoldModel>& model, int count, unsigned long long seed,
    double amplitude = 0.1);

void metric_to_json(nlohmann::json& j, ModelName name, const std::string& psi_id,
                    const std::vector<double>& coefficients);

}  // namespace kahlerlab
