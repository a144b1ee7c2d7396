// kahlerlab: batch experiment runner for the toric Fano laboratory.
//
// Usage: kahlerlab <command> --config path.json [--out dir]
// Commands: invariants, flow, geodesic, stability, calibrate.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure
// (partial artifacts are preserved).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kahlerlab/errors.hpp"
#include "kahlerlab/flow.hpp"
#include "kahlerlab/functionals.hpp"
#include "kahlerlab/geodesic.hpp"
#include "kahlerlab/invariants.hpp"
#include "kahlerlab/io.hpp"
#include "kahlerlab/metric.hpp"

using nlohmann::json;
using namespace kahlerlab;

namespace {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// ------------------------------------------------------------ config access

class Config {
  public:
    Config(json j, std::string canonical) : j_(std::move(j)), canonical_(std::move(canonical)) {
        if (!j_.is_object()) throw ConfigError("config root must be a JSON object");
    }

    const std::string& canonical() const { return canonical_; }
    std::string hash() const { return fnv1a_hex(canonical_); }

    bool has(const std::string& key) const {
        used_.insert(key);
        return j_.contains(key);
    }

    template <typename T>
    T get(const std::string& key, const T& fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config key '" + key + "' has the wrong type");
        }
    }

    template <typename T>
    T require(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError("missing required config key '" + key + "'");
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config key '" + key + "' has the wrong type");
        }
    }

    json raw(const std::string& key) {
        used_.insert(key);
        return j_.contains(key) ? j_.at(key) : json();
    }

    void reject_unknown() const {
        for (const auto& [key, value] : j_.items())
            if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }

  private:
    json j_;
    std::string canonical_;
    mutable std::set<std::string> used_;
};

Config load_config(const std::string& path, const std::string& command) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    std::string canonical = j.dump();
    Config cfg(std::move(j), std::move(canonical));
    if (cfg.has("command")) {
        const std::string declared = cfg.get<std::string>("command", command);
        if (declared != command)
            throw ConfigError("config key 'command' is '" + declared + "', expected '" +
                              command + "'");
    }
    return cfg;
}

int quad_order_override(int configured) {
    const char* env = std::getenv("KAHLERLAB_QUAD_ORDER");
    if (!env || !*env) return configured;
    const int v = std::atoi(env);
    if (v < 4 || v > 512) throw ConfigError("KAHLERLAB_QUAD_ORDER must be in [4, 512]");
    return v;
}

struct ModelSetup {
    std::shared_ptr<const ManifoldModel> model;
    SymplecticPotential u;
    std::string psi_id;
    std::vector<double> coefficients;
    int quad_points = 0;
};

ModelSetup model_setup(Config& cfg) {
    ModelSetup s;
    const std::string name = cfg.require<std::string>("model");
    ModelName mn;
    try {
        mn = model_from_string(name);
    } catch (const std::invalid_argument&) {
        throw ConfigError("config key 'model' must be CP1 or Hirzebruch1");
    }
    s.quad_points = cfg.get<int>("quadrature_order", 24);
    if (s.quad_points < 4 || s.quad_points > 512)
        throw ConfigError("config key 'quadrature_order' must be in [4, 512]");
    s.quad_points = quad_order_override(s.quad_points);
    s.model = make_model(mn, s.quad_points);
    s.psi_id = cfg.get<std::string>("psi", "zero");
    s.coefficients = cfg.get<std::vector<double>>("coefficients", {});
    try {
        s.u = SymplecticPotential(s.model,
                                  psi_from_catalog(s.model->polytope, s.psi_id, s.coefficients));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid metric spec: ") + e.what());
    }
    s.u.require_valid();
    return s;
}

json metadata_json(const Config& cfg, const ModelSetup& s) {
    json m;
    m["config_hash"] = cfg.hash();
    m["quadrature_order"] = s.quad_points;
    return m;
}

std::vector<std::string> metadata_lines(const Config& cfg, const ModelSetup& s) {
    return {"config_hash: " + cfg.hash(),
            "quadrature_order: " + std::to_string(s.quad_points)};
}

// ---------------------------------------------------------------- commands

int cmd_calibrate(Config& cfg, const std::filesystem::path& out) {
    ModelSetup s = model_setup(cfg);
    const double L = cfg.get<double>("L", 10.0);
    const int m = cfg.get<int>("m", 512);
    const bool grid_csv = cfg.get<bool>("grid_csv", false);
    cfg.reject_unknown();

    const RicciPotential r = ricci_potential(s.u);
    json rep = metadata_json(cfg, s);
    rep["model"] = to_string(s.model->name);
    rep["sup_h_reference"] = r.sup_abs();

    if (s.model->n == 1) {
        const ComplexPotential f = legendre_dual(s.u, L, m);
        double round = 0.0;
        for (const Vec& x : s.u.quad().nodes)
            round = std::fmax(round, std::fabs(dual_back(f, x[0]) - s.u.value(x)));
        rep["legendre_roundtrip"] = round;
        rep["legendre_L"] = L;
        rep["legendre_m"] = m;
    }
    rep["converged"] = r.sup_abs() < 1e-8;
    write_file_atomic(out / "calibrate.json", rep.dump(2) + "\n");

    if (grid_csv && s.model->n == 1) {
        CsvTable t;
        t.metadata = metadata_lines(cfg, s);
        t.columns = {"x", "u", "h"};
        const QuadratureRule& q = s.u.quad();
        for (std::size_t i = 0; i < q.size(); ++i)
            t.add_row({q.nodes[i][0], s.u.value(q.nodes[i]), r.h[i]});
        write_file_atomic(out / "metric_grid.csv", t.str());
    }
    return 0;
}

int cmd_invariants(Config& cfg, const std::filesystem::path& out) {
    ModelSetup s = model_setup(cfg);
    cfg.reject_unknown();

    const BetaReport beta = beta_vector(s.model);
    const ExtremalFieldReport xf = extremal_field(s.model);

    json rep = metadata_json(cfg, s);
    rep["model"] = to_string(s.model->name);
    rep["beta"] = std::vector<double>(beta.beta.begin(), beta.beta.begin() + s.model->n);
    rep["beta_independence_delta"] = beta.independence_delta;
    rep["xi0"] = {{"xi", std::vector<double>(xf.xi0.xi.begin(), xf.xi0.xi.begin() + s.model->n)},
                  {"c", xf.xi0.c}};
    rep["xi0_route_delta"] = xf.route_delta;
    rep["H_xi0"] = xf.h_at_xi0;

    json basis = json::array();
    json residuals = json::array();
    for (int a = 0; a < s.model->n; ++a) {
        Vec e{0.0, 0.0};
        e[a] = 1.0;
        const TorusVector xi = make_torus_vector(*s.model, e);
        const FutakiPair fp = futaki(s.u, xi);
        basis.push_back({{"xi", std::vector<double>(e.begin(), e.begin() + s.model->n)},
                         {"measure", fp.measure},
                         {"gradient", fp.gradient}});
        residuals.push_back(modified_futaki(s.u, xi, xf.xi0));
    }
    rep["futaki_basis"] = basis;
    rep["modified_futaki_residuals"] = residuals;

    const FunctionalReport hrep = functional_report(
        "H_xi0",
        [&](int q) {
            auto m = make_model(s.model->name, q);
            return extremal_field(m).h_at_xi0;
        },
        s.quad_points);
    rep["convergence_flags"] = {{"H_xi0_converged", hrep.converged},
                                {"H_xi0_refinement_delta", hrep.refinement_delta},
                                {"xi0_routes_agree", xf.route_delta < 1e-6}};
    write_file_atomic(out / "invariants.json", rep.dump(2) + "\n");
    return 0;
}

int cmd_flow(Config& cfg, const std::filesystem::path& out) {
    ModelSetup s = model_setup(cfg);
    const double T = cfg.require<double>("T");
    const double dt = cfg.require<double>("dt");
    const double L = cfg.get<double>("L", 12.0);
    const int m = cfg.get<int>("m", 513);
    cfg.reject_unknown();

    const FlowState end = run_krf(s.u, T, dt, L, m);

    CsvTable t;
    t.metadata = metadata_lines(cfg, s);
    t.metadata.push_back("terminal_sup_h: " + format_double(flow_sup_h(end)));
    t.columns = {"t", "H", "sup_h", "c", "dH_dt_identity"};
    for (std::size_t k = 0; k < end.trace.t.size(); ++k)
        t.add_row({end.trace.t[k], end.trace.H[k], end.trace.sup_h[k], end.trace.c[k],
                   end.trace.dH_rhs[k]});
    write_file_atomic(out / "flow_trace.csv", t.str());
    return 0;
}

std::vector<RaySpec> rays_from_config(Config& cfg, const ModelSetup& s, double delta) {
    if (!cfg.has("rays")) return default_ray_catalog(s.model, delta);
    std::vector<RaySpec> rays;
    const json list = cfg.raw("rays");
    if (!list.is_array()) throw ConfigError("config key 'rays' must be an array");
    int index = 0;
    for (const json& r : list) {
        if (!r.is_object() || !r.contains("type"))
            throw ConfigError("each ray needs a 'type' (affine|pl|poly)");
        const std::string type = r.at("type").get<std::string>();
        const std::string name = type + "_" + std::to_string(index++);
        if (type == "affine") {
            const auto xi = r.at("xi").get<std::vector<double>>();
            Vec v{0.0, 0.0};
            for (std::size_t i = 0; i < xi.size() && i < 2; ++i) v[i] = xi[i];
            const TorusVector tv = make_torus_vector(*s.model, v);
            rays.push_back(
                {name, Direction{AffineDirection{Vec{-tv.xi[0], -tv.xi[1]}, -tv.c}}});
        } else if (type == "pl") {
            HingeDirection h;
            const auto a = r.at("a").get<std::vector<double>>();
            for (std::size_t i = 0; i < a.size() && i < 2; ++i) h.a[i] = a[i];
            h.b = r.at("b").get<double>();
            h.delta = r.contains("delta") ? r.at("delta").get<double>() : delta;
            rays.push_back({name, Direction{h}});
        } else if (type == "poly") {
            const auto c = r.at("coefficients").get<std::vector<double>>();
            Poly2 p(s.model->n, 2);
            const int idx[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
            for (std::size_t i = 0; i < c.size() && i < 6; ++i)
                p.coeff(idx[i][0], idx[i][1]) = c[i];
            rays.push_back({name, Direction{PolyDirection{p}}});
        } else {
            throw ConfigError("unknown ray type '" + type + "'");
        }
    }
    return rays;
}

int cmd_geodesic(Config& cfg, const std::filesystem::path& out) {
    ModelSetup s = model_setup(cfg);
    const double delta = cfg.get<double>("delta", 1e-2);
    const double t_max = cfg.get<double>("t_max", 8.0);
    const double t_step = cfg.get<double>("t_step", 1.0);
    const std::vector<RaySpec> rays = rays_from_config(cfg, s, delta);
    cfg.reject_unknown();
    if (!(t_step > 0.0) || !(t_max >= 0.0))
        throw ConfigError("config keys 't_max'/'t_step' must be positive");

    const TorusVector X = extremal_field(s.model).xi0;
    for (const RaySpec& ray : rays) {
        const GeodesicPath path = make_geodesic(s.u, ray.v, t_max);
        CsvTable t;
        t.metadata = metadata_lines(cfg, s);
        t.metadata.push_back("ray: " + ray.name);
        t.columns = {"t", "H_of_t", "F", "dF", "dFX"};
        for (double tt = 0.0; tt <= t_max + 1e-12; tt += t_step)
            t.add_row({tt, h_of_t(path, tt), f_value(path, tt),
                       f_derivative_along(path, tt).dF,
                       modified_f_derivative_along(path, tt, X)});
        write_file_atomic(out / ("geodesic_" + ray.name + ".csv"), t.str());
    }
    return 0;
}

int cmd_stability(Config& cfg, const std::filesystem::path& out) {
    ModelSetup s = model_setup(cfg);
    const double delta = cfg.get<double>("delta", 1e-2);
    const std::string probe = cfg.get<std::string>("probe", "F");
    const double tolerance = cfg.get<double>("tolerance", probe == "F_X" ? 1e-5 : 1e-6);
    const std::vector<RaySpec> rays = rays_from_config(cfg, s, delta);
    cfg.reject_unknown();
    if (probe != "F" && probe != "F_X")
        throw ConfigError("config key 'probe' must be F or F_X");

    TorusVector X;
    if (probe == "F_X") X = extremal_field(s.model).xi0;
    const StabilityReport rep =
        stability_probe(s.u, rays, probe == "F_X" ? &X : nullptr, tolerance);

    json j = metadata_json(cfg, s);
    j["model"] = to_string(s.model->name);
    j["header"] = rep.header;
    j["probe"] = rep.probe;
    j["sample_times"] = rep.sample_times;
    j["tolerance"] = rep.tolerance;
    j["semistable_on_catalog"] = rep.semistable_on_catalog;
    json rows = json::array();
    for (const RayVerdict& v : rep.rays) {
        json r;
        r["ray"] = v.ray;
        r["slopes"] = v.slopes;
        r["terminal_slope"] = v.terminal_slope;
        if (v.first_nonnegative_t)
            r["first_nonnegative_t"] = *v.first_nonnegative_t;
        else
            r["first_nonnegative_t"] = nullptr;
        rows.push_back(r);
    }
    j["rays"] = rows;
    write_file_atomic(out / "stability.json", j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kahlerlab: numerical probes for toric Fano functionals"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string command;
    for (const char* name : {"invariants", "flow", "geodesic", "stability", "calibrate"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config path")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->callback([&command, name]() { command = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = load_config(config_path, command);
        const std::filesystem::path out(out_dir);
        if (command == "calibrate") return cmd_calibrate(cfg, out);
        if (command == "invariants") return cmd_invariants(cfg, out);
        if (command == "flow") return cmd_flow(cfg, out);
        if (command == "geodesic") return cmd_geodesic(cfg, out);
        return cmd_stability(cfg, out);
    } catch (const ConfigError& e) {
        json err{{"error", e.what()}, {"kind", "config"}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    } catch (const std::exception& e) {
        json err{{"error", e.what()}, {"kind", "numerical"}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 3;
    }
}
