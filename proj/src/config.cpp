#include "frontcont/config.hpp"

#include "frontcont/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace frontcont {

using nlohmann::json;

namespace {

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    template <class T>
    void get(const std::string& k, T& out) {
        seen_.insert(k);
        auto it = j_.find(k);
        if (it == j_.end()) return;
        if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw ConfigError(key(k), "expected a string");
            out = it->template get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ConfigError(key(k), "expected an integer");
            out = it->template get<T>();
        } else {
            if (!it->is_number()) throw ConfigError(key(k), "expected a number");
            out = it->template get<double>();
        }
    }

    void get_optional(const std::string& k, std::optional<double>& out) {
        seen_.insert(k);
        auto it = j_.find(k);
        if (it == j_.end() || it->is_null()) return;
        if (!it->is_number()) throw ConfigError(key(k), "expected a number or null");
        out = it->get<double>();
    }

    // null means +infinity
    void get_bound(const std::string& k, double& out) {
        seen_.insert(k);
        auto it = j_.find(k);
        if (it == j_.end()) return;
        if (it->is_null()) {
            out = std::numeric_limits<double>::infinity();
            return;
        }
        if (!it->is_number()) throw ConfigError(key(k), "expected a number or null");
        out = it->get<double>();
    }

    Section sub(const std::string& k) {
        seen_.insert(k);
        auto it = j_.find(k);
        static const json empty = json::object();
        return Section(it == j_.end() ? empty : *it, key(k));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

json bound(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

RunConfig parse_config(const json& j) {
    RunConfig c;
    Section root(j, "");
    root.get("problem", c.problem);
    require(c.problem == "robin" || c.problem == "bore", "problem", "must be \"robin\" or \"bore\"");

    Section g = root.sub("grid");
    g.get_optional("L", c.grid.L);
    g.get("nx", c.grid.nx);
    g.get("ny", c.grid.ny);
    g.finish();
    if (c.grid.L) require(*c.grid.L > 0.0, "grid.L", "must be positive");
    require(c.grid.nx >= 5, "grid.nx", "must be at least 5");
    require(c.grid.nx % 2 == 1, "grid.nx", "nx must be odd");
    require(c.grid.ny >= 5, "grid.ny", "must be at least 5");

    Section r = root.sub("robin");
    r.get("family", c.robin.family);
    r.get("a", c.robin.a);
    r.get("lambda_seed", c.robin.lambda_seed);
    r.get("lambda_seed_max", c.robin.lambda_seed_max);
    r.finish();
    require(c.robin.family == "quartic", "robin.family", "only \"quartic\" is built in");
    require(c.robin.a > 0.0, "robin.a", "must be positive");
    require(c.robin.lambda_seed != 0.0, "robin.lambda_seed", "must be non-zero");
    require(c.robin.lambda_seed_max > 0.0, "robin.lambda_seed_max", "must be positive");

    Section b = root.sub("bore");
    b.get("rho1", c.bore.rho1);
    b.get("rho2", c.bore.rho2);
    b.get("eps_seed", c.bore.eps_seed);
    b.get("eps_seed_max", c.bore.eps_seed_max);
    b.get("delta", c.bore.delta);
    b.finish();
    require(c.bore.rho1 > 0.0, "bore.rho1", "must be positive");
    require(c.bore.rho2 > 0.0, "bore.rho2", "must be positive");
    require(c.bore.rho2 < c.bore.rho1, "bore.rho2", "requires rho2 < rho1");
    require(c.bore.eps_seed != 0.0, "bore.eps_seed", "must be non-zero");
    require(c.bore.eps_seed_max > 0.0, "bore.eps_seed_max", "must be positive");
    require(c.bore.delta > 0.0, "bore.delta", "must be positive");

    ContinuationConfig& k = c.continuation;
    Section s = root.sub("continuation");
    s.get("ds", k.ds);
    s.get("ds_min", k.ds_min);
    s.get("ds_max", k.ds_max);
    s.get("eps_newton", k.eps_newton);
    s.get("max_newton", k.max_newton);
    s.get("max_steps", k.max_steps);
    s.get("fast_newton", k.fast_newton);
    s.get("ds_grow", k.ds_grow);
    s.get_bound("N_max", k.N_max);
    s.get_bound("lambda_max", k.lambda_max);
    s.get("tol_plateau", k.tol_plateau);
    s.get("plateau_fraction", k.plateau_fraction);
    s.get("plateau_state_tol", k.plateau_state_tol);
    s.get("sigma_guard", k.sigma_guard);
    s.get("loop_tol", k.loop_tol);
    s.get("tail_tol", k.tail_tol);
    s.get("mono_floor", k.mono_floor);
    s.get("flow_force_tol", k.flow_force_tol);
    s.get("chi_width", k.chi_width);
    s.get("direction", k.direction);
    s.finish();
    require(k.ds_min > 0.0, "continuation.ds_min", "must be positive");
    require(k.ds_max >= k.ds_min, "continuation.ds_max", "must be at least ds_min");
    require(k.ds >= k.ds_min && k.ds <= k.ds_max, "continuation.ds", "must lie in [ds_min, ds_max]");
    require(k.eps_newton > 0.0, "continuation.eps_newton", "must be positive");
    require(k.max_newton >= 1, "continuation.max_newton", "must be at least 1");
    require(k.max_steps >= 0, "continuation.max_steps", "must be non-negative");
    require(k.ds_grow >= 1.0, "continuation.ds_grow", "must be at least 1");
    require(k.N_max > 0.0, "continuation.N_max", "must be positive");
    require(k.lambda_max > 0.0, "continuation.lambda_max", "must be positive");
    require(k.tol_plateau > 0.0 && k.tol_plateau < 1.0, "continuation.tol_plateau", "must lie in (0, 1)");
    require(k.plateau_fraction > 0.0 && k.plateau_fraction < 1.0, "continuation.plateau_fraction",
            "must lie in (0, 1)");
    require(k.plateau_state_tol > 0.0, "continuation.plateau_state_tol", "must be positive");
    require(k.sigma_guard > 0.0, "continuation.sigma_guard", "must be positive");
    require(k.loop_tol > 0.0, "continuation.loop_tol", "must be positive");
    require(k.tail_tol > 0.0, "continuation.tail_tol", "must be positive");
    require(k.mono_floor >= 0.0, "continuation.mono_floor", "must be non-negative");
    require(k.flow_force_tol > 0.0, "continuation.flow_force_tol", "must be positive");
    require(k.chi_width > 0.0, "continuation.chi_width", "must be positive");
    require(k.direction >= -1 && k.direction <= 1, "continuation.direction", "must be -1, 0 or 1");

    Section o = root.sub("output");
    o.get("directory", c.output.directory);
    o.get("snapshot_stride", c.output.snapshot_stride);
    o.get("precision", c.output.precision);
    o.finish();
    require(!c.output.directory.empty(), "output.directory", "must not be empty");
    require(c.output.snapshot_stride >= 0, "output.snapshot_stride", "must be non-negative");
    require(c.output.precision >= 1 && c.output.precision <= 17, "output.precision", "must lie in [1, 17]");

    root.finish();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("<file>", "cannot read '" + path + "'");
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("parse error: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    const ContinuationConfig& k = c.continuation;
    json j;
    j["problem"] = c.problem;
    j["grid"] = {{"L", c.grid.L ? json(*c.grid.L) : json(nullptr)}, {"nx", c.grid.nx}, {"ny", c.grid.ny}};
    j["robin"] = {{"family", c.robin.family},
                  {"a", c.robin.a},
                  {"lambda_seed", c.robin.lambda_seed},
                  {"lambda_seed_max", c.robin.lambda_seed_max}};
    j["bore"] = {{"rho1", c.bore.rho1},
                 {"rho2", c.bore.rho2},
                 {"eps_seed", c.bore.eps_seed},
                 {"eps_seed_max", c.bore.eps_seed_max},
                 {"delta", c.bore.delta}};
    j["continuation"] = {{"ds", k.ds},
                         {"ds_min", k.ds_min},
                         {"ds_max", k.ds_max},
                         {"eps_newton", k.eps_newton},
                         {"max_newton", k.max_newton},
                         {"max_steps", k.max_steps},
                         {"fast_newton", k.fast_newton},
                         {"ds_grow", k.ds_grow},
                         {"N_max", bound(k.N_max)},
                         {"lambda_max", bound(k.lambda_max)},
                         {"tol_plateau", k.tol_plateau},
                         {"plateau_fraction", k.plateau_fraction},
                         {"plateau_state_tol", k.plateau_state_tol},
                         {"sigma_guard", k.sigma_guard},
                         {"loop_tol", k.loop_tol},
                         {"tail_tol", k.tail_tol},
                         {"mono_floor", k.mono_floor},
                         {"flow_force_tol", k.flow_force_tol},
                         {"chi_width", k.chi_width},
                         {"direction", k.direction}};
    j["output"] = {{"directory", c.output.directory},
                   {"snapshot_stride", c.output.snapshot_stride},
                   {"precision", c.output.precision}};
    return j;
}

RobinNonlinearity make_nonlinearity(const RobinConfig& c) {
    if (c.family != "quartic") throw ConfigError("robin.family", "unknown family '" + c.family + "'");
    return quartic_nonlinearity(c.a);
}

double auto_half_length(const RunConfig& c) {
    // the tanh profile deviates from its limits like 2 exp(-2 kappa |x|)
    const double target = std::log(1e8);
    double rate = 0.0;
    if (c.problem == "robin") rate = 2.0 * kappa1_robin(make_nonlinearity(c.robin)) * std::abs(c.robin.lambda_seed);
    else rate = 2.0 * kappa1_bore(c.bore.rho1, c.bore.rho2) * std::abs(c.bore.eps_seed);
    return std::ceil(target / rate);
}

Grid make_grid(RunConfig& c) {
    if (!c.grid.L) c.grid.L = auto_half_length(c);
    return build_grid(*c.grid.L, c.grid.nx, c.grid.ny, c.problem == "bore" ? Layout::two_layer : Layout::single);
}

std::unique_ptr<FrontProblem> make_problem(RunConfig& c) {
    const Grid g = make_grid(c);
    if (c.problem == "robin")
        return std::make_unique<RobinProblem>(g, make_nonlinearity(c.robin), c.robin.lambda_seed,
                                              c.robin.lambda_seed_max);
    return std::make_unique<BoreProblem>(g, c.bore.rho1, c.bore.rho2, c.bore.eps_seed, c.bore.delta,
                                         c.bore.eps_seed_max);
}

}  // namespace frontcont
