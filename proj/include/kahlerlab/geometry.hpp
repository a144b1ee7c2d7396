#pragma once

#include <array>
#include <string>
#include <vector>

#include "kahlerlab/linalg.hpp"

#include <json.hpp>

namespace kahlerlab {

enum class ModelName { CP1, Hirzebruch1 };

ModelName model_from_string(const std::string& s);
std::string to_string(ModelName m);

struct Facet {
    std::array<int, 2> normal{0, 0};  // primitive integer normal
    // offset is fixed to 1 (anticanonical gauge): facet reads <x, normal> + 1 >= 0
};

/// Moment polytope of a toric Fano surface/curve, all facet offsets equal 1.
struct Polytope {
    int dim = 1;
    std::vector<Facet> facets;
    std::vector<Vec> vertices;

    /// <x, normal_k> + 1 of facet k.
    double facet_value(std::size_t k, const Vec& x) const;
    /// min over facets of <x, normal> + 1 (positive iff x is interior).
    double interior_margin(const Vec& x) const;
    double volume() const;
    Vec barycenter() const;

    void validate() const;  // throws std::invalid_argument on gauge violations
};

Polytope build_model(ModelName name);

struct QuadratureRule {
    int dim = 1;
    int order = 0;  // polynomial exactness degree
    std::vector<Vec> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    /// Sum of weights[i] * f[i] with the fixed node order.
    double integrate(const std::vector<double>& f) const;
    double integrate_product(const std::vector<double>& f, const std::vector<double>& g) const;
};

/// Interior-node rule: Gauss-Legendre on an interval, barycentric fan
/// triangulation with collapsed-square Gauss product rules on a polygon.
/// `points_per_axis` >= 1 is the 1D Gauss count used per direction.
QuadratureRule quadrature(const Polytope& p, int points_per_axis);

/// A convex cell is an interval (dim 1, two ascending endpoints) or a
/// counterclockwise polygon (dim 2). Splits every cell along <a, x> = c and
/// drops degenerate slivers.
std::vector<std::vector<Vec>> split_cells(int dim, const std::vector<std::vector<Vec>>& cells,
                                          const Vec& a, double c);

/// Composite rule over a cell decomposition, one `quadrature`-style rule per
/// cell, concatenated in cell order.
QuadratureRule cell_quadrature(int dim, const std::vector<std::vector<Vec>>& cells,
                               int points_per_axis);

/// (mass, first moment) of e^{<b,x>} dx over the polytope.
struct Moments {
    double mass = 0.0;
    Vec first{0.0, 0.0};
};
Moments polytope_moments(const Polytope& p, const Vec& b, int points_per_axis = 32);

/// 1D Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

void to_json(nlohmann::json& j, const Polytope& p);
void from_json(const nlohmann::json& j, Polytope& p);

}  // namespace kahlerlab
