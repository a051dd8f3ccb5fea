#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <variant>

#include "sdlab/cz_decomposition.hpp"
#include "sdlab/dyadic_grid.hpp"
#include "sdlab/exponents.hpp"
#include "sdlab/grid_function.hpp"
#include "sdlab/harness.hpp"
#include "sdlab/maximal.hpp"
#include "sdlab/sparse_forms.hpp"
#include "sdlab/specs.hpp"
#include "sdlab/weight_constants.hpp"

namespace sdlab::cli {

using json = nlohmann::ordered_json;

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

/// Raised for failed preconditions of an otherwise valid request (exit code 2).
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Output tables

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    void add(std::vector<json> row) { rows.push_back(std::move(row)); }
};

std::string cell_text(const json& v) {
    if (v.is_number_float()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    return v.dump();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

json number(double x) {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

std::string cube_text(const DyadicCube& q) {
    auto join = [](const auto& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ":" : "") + std::to_string(v[i]);
        return s;
    };
    return "a=" + (q.shift.empty() ? std::string("0") : join(q.shift)) + " k=" + std::to_string(q.level) +
           " m=" + join(q.index);
}

// ---------------------------------------------------------------------------
// Options

/// All flags are kept as strings so numeric values are parsed by one routine
/// (decimals, "a/b" and "inf") whether they come from the command line or a config file.
class Options {
public:
    void bind(CLI::App& app, const std::string& name, const std::string& help) {
        values_[name];
        options_[name] = app.add_option("--" + name, values_[name], help);
    }

    [[nodiscard]] const std::string& get(const std::string& name) const { return values_.at(name); }
    [[nodiscard]] bool has(const std::string& name) const { return !values_.at(name).empty(); }
    void set_default(const std::string& name, const std::string& value) {
        if (values_.at(name).empty()) values_[name] = value;
    }

    void apply_config(const json& config) {
        if (!config.is_object()) throw std::invalid_argument("config must be a JSON object");
        for (const auto& [key, value] : config.items()) {
            if (!options_.count(key) || key == "config") throw std::invalid_argument("unknown config key '" + key + "'");
            if (options_[key]->count() > 0) continue;  // command line wins
            if (value.is_string()) values_[key] = value.get<std::string>();
            else if (value.is_number_integer()) values_[key] = std::to_string(value.get<long long>());
            else if (value.is_number()) values_[key] = format_number(value.get<double>());
            else throw std::invalid_argument("config key '" + key + "' must be a string or number");
        }
    }

    /// Effective settings that influence results; jobs and output paths are left out.
    [[nodiscard]] json canonical(const std::string& command, const std::string& target) const {
        json j;
        j["command"] = command;
        if (!target.empty()) j["target"] = target;
        for (const auto& [k, v] : values_)
            if (!v.empty() && k != "jobs" && k != "out" && k != "config" && k != "family-out") j[k] = v;
        return j;
    }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, CLI::Option*> options_;
};

double num(const Options& o, const std::string& name) {
    try {
        return parse_number(o.get(name));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("--" + name + ": " + e.what());
    }
}

std::uint64_t unsigned_value(const Options& o, const std::string& name) {
    const std::string& s = o.get(name);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size() || s[0] == '-')
        throw std::invalid_argument("--" + name + ": expected a non-negative integer, got '" + s + "'");
    return v;
}

ExponentTuple exponent_tuple(const Options& o, int n) {
    ExponentTuple e;
    e.n = n;
    e.p0 = num(o, "p0");
    e.q0 = num(o, "q0");
    e.p = num(o, "p");
    e.alpha = num(o, "alpha");
    if (o.has("q")) {
        e.q = num(o, "q");
    } else {
        const double inv = 1.0 / e.p - e.alpha / (n * conjugate(e.q0));
        if (!(inv > 0.0)) throw InadmissibleExponents("cannot derive q: 1/p - alpha/(n q0') must be positive");
        e.q = 1.0 / inv;
    }
    e.validate();
    return e;
}

Grid make_grid(const Options& o) { return Grid(parse_grid_spec(o.get("grid"))); }

std::shared_ptr<const Grid> standard_grid(const Options& o) {
    const GridSpec spec = parse_grid_spec(o.get("grid"));
    if (!spec.is_standard()) throw std::invalid_argument("this command runs on the standard grid (omit a=)");
    return std::make_shared<const Grid>(spec);
}

SparseFamily make_family(const Options& o, std::shared_ptr<const Grid> grid, double p0) {
    const std::string& spec = o.get("sparse");
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "chain") {
        const double cell = arg.empty() ? 0.0 : parse_number(arg);
        if (cell < 0 || cell != std::floor(cell)) throw std::invalid_argument("--sparse chain:<cell> needs a cell index");
        return chain_family(grid, static_cast<std::size_t>(cell));
    }
    if (kind == "stopping") {
        double rho = 2.0;
        if (!arg.empty()) {
            if (arg.rfind("rho=", 0) != 0) throw std::invalid_argument("--sparse stopping[:rho=<r>]");
            rho = parse_number(arg.substr(4));
        }
        if (!o.has("function")) throw std::invalid_argument("--sparse stopping needs --function");
        const GridFunction f = parse_function_spec(o.get("function"), grid->lattice());
        return build_stopping_family(f.abs_pow(1.0), p0, grid, rho);
    }
    if (kind == "file") {
        std::string path = arg;
        double eta = 0.0;
        if (const auto comma = arg.find(",eta="); comma != std::string::npos) {
            path = arg.substr(0, comma);
            eta = parse_number(arg.substr(comma + 5));
        }
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open family file '" + path + "'");
        SparseFamily s = read_family_csv(in, grid, eta);
        if (eta == 0.0) s.eta = s.measured_eta();
        return s;
    }
    throw std::invalid_argument("--sparse must be chain:<cell>, stopping[:rho=<r>] or file:<path>[,eta=<eta>]");
}

// ---------------------------------------------------------------------------
// Commands. Each fills tables and summary lines and returns its exit code.

struct Result {
    std::vector<Table> tables;
    std::vector<std::string> summary;
    int code = 0;
};

std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

Result cmd_constants(const Options& o) {
    const Grid grid = make_grid(o);
    const Weight w(parse_function_spec(o.get("weight"), grid.lattice()));
    const auto one = one_grid(grid);
    const double p = num(o, "p");
    const double s = num(o, "s");
    const double alpha = num(o, "alpha");
    const int n = grid.dimension();

    Table t{"constants", {"name", "parameters", "value", "witness", "algorithm", "depth"}, {}};
    auto add = [&](const ConstantReport& r, const std::string& params) {
        t.add({r.name, params, number(r.value), r.cube ? cube_text(*r.cube) : "", to_string(r.algorithm), r.depth});
    };
    add(ap_constant(w, p, one), "p=" + format_number(p));
    add(fujii_wilson(w, one), "");
    add(rh_constant(w, s, one), "s=" + format_number(s));
    const double q = o.has("q") ? num(o, "q") : 1.0 / (1.0 / p - alpha / n);
    const std::string pq = "p=" + format_number(p) + " q=" + format_number(q) + " alpha=" + format_number(alpha);
    add(ar_pq_constant(w, p, q, alpha, one), pq);
    add(ar_pq_prime(w, p, q, alpha, one), pq);
    if (o.has("eta")) {
        const auto shifted = all_shifted_grids(grid.lattice());
        const double eta = num(o, "eta");
        add(doubling_constant(w, eta, shifted), "eta=" + format_number(eta));
        const double eta_n = std::ldexp(1.0, -n);
        auto dn = doubling_constant(w, eta_n, shifted);
        dn.name = "D^2^n";
        add(dn, "eta=" + format_number(eta_n));
    }
    return {{t}, {}, 0};
}

Result cmd_czd(const Options& o) {
    const Grid grid = make_grid(o);
    if (!o.has("function")) throw std::invalid_argument("czd needs --function (the function h)");
    if (!o.has("lambda")) throw std::invalid_argument("czd needs --lambda");
    const GridFunction h = parse_function_spec(o.get("function"), grid.lattice());
    const Weight u(parse_function_spec(o.get("weight"), grid.lattice()));
    const double lambda = num(o, "lambda");
    const auto outcome = decompose(h, u, lambda, grid);
    if (const auto* root = std::get_if<RootExceedsThreshold>(&outcome)) {
        throw PreconditionError("top cube " + cube_text(grid.cube(root->cube)) + " has average " +
                                format_number(root->average) + " > lambda = " + format_number(lambda));
    }
    const auto& cz = std::get<CZDecomposition>(outcome);
    const auto avg = weighted_averages(h, u, grid);

    Table maximal{"maximal", {"shift", "level", "index", "u_average"}, {}};
    for (std::size_t id : cz.maximal) {
        const auto& q = grid.cube(id);
        std::string shift, index;
        for (std::size_t i = 0; i < q.index.size(); ++i) {
            shift += (i ? ":" : "") + std::to_string(q.shift.empty() ? 0 : q.shift[i]);
            index += (i ? ":" : "") + std::to_string(q.index[i]);
        }
        maximal.add({shift, q.level, index, avg[id]});
    }
    Table cells{"cells", {"cell", "h", "g", "b", "omega"}, {}};
    std::vector<char> in(h.size(), 0);
    for (std::size_t c : cz.omega) in[c] = 1;
    for (std::size_t c = 0; c < h.size(); ++c) cells.add({c, h[c], cz.good[c], cz.bad[c], in[c] ? 1 : 0});
    return {{maximal, cells},
            {"maximal cubes: " + std::to_string(cz.maximal.size()) + ", omega cells: " + std::to_string(cz.omega.size())},
            0};
}

Result cmd_sparse_eval(const Options& o) {
    const GridSpec spec = parse_grid_spec(o.get("grid"));
    const auto grid = std::make_shared<const Grid>(spec);
    if (!o.has("function")) throw std::invalid_argument("sparse-eval needs --function");
    const GridFunction f = parse_function_spec(o.get("function"), grid->lattice());
    const double p0 = num(o, "p0");
    const SparseFamily s = make_family(o, grid, p0);
    const auto check = validate(s);
    if (!check.ok()) throw PreconditionError("sparse family invalid: " + check.message);

    std::optional<ExponentTuple> e;
    double order = num(o, "alpha");
    if (o.has("g")) {
        e = exponent_tuple(o, spec.dimension);
        order = e->operator_order();
    }
    const GridFunction tf = sparse_operator(s, f, order);

    Table family{"family", {"shift", "level", "index", "e_cells", "cube_cells"}, {}};
    for (const auto& m : s.members) {
        std::string shift, index;
        for (std::size_t i = 0; i < m.cube.index.size(); ++i) {
            shift += (i ? ":" : "") + std::to_string(m.cube.shift.empty() ? 0 : m.cube.shift[i]);
            index += (i ? ":" : "") + std::to_string(m.cube.index[i]);
        }
        family.add({shift, m.cube.level, index, m.e_cells.size(), grid->cells_in(grid->id(m.cube))});
    }
    Table cells{"cells", {"cell", "f", "Tf"}, {}};
    for (std::size_t c = 0; c < f.size(); ++c) cells.add({c, f[c], tf[c]});

    Result r{{family, cells}, {}, 0};
    r.summary.push_back("members=" + std::to_string(s.members.size()) + " eta=" + format_number(s.eta) +
                        " operator_order=" + format_number(order) + " validation=ok");
    if (e) {
        const GridFunction g = parse_function_spec(o.get("g"), grid->lattice());
        const double form = bilinear_form(std::span<const SparseFamily>(&s, 1), f, g, *e);
        r.summary.push_back("pairing=" + format_number(pairing(tf, g)) + " bilinear_form=" + format_number(form));
    }
    if (o.has("family-out")) {
        std::ofstream fo(o.get("family-out"));
        if (!fo) throw std::invalid_argument("cannot write '" + o.get("family-out") + "'");
        write_family_csv(fo, s);
    }
    return r;
}

Result cmd_maximal(const Options& o) {
    const Grid grid = make_grid(o);
    if (!o.has("function")) throw std::invalid_argument("maximal needs --function");
    const GridFunction f = parse_function_spec(o.get("function"), grid.lattice());
    const Weight u(parse_function_spec(o.get("weight"), grid.lattice()));
    const GridFunction mf = dyadic_maximal(f, u, num(o, "alpha"), grid);
    Table cells{"cells", {"cell", "f", "Mf"}, {}};
    for (std::size_t c = 0; c < f.size(); ++c) cells.add({c, f[c], mf[c]});
    return {{cells}, {}, 0};
}

TrialPlan plan_of(const Options& o) {
    TrialPlan plan;
    plan.trials = unsigned_value(o, "trials");
    plan.seed = unsigned_value(o, "seed");
    plan.jobs = static_cast<unsigned>(std::max<std::uint64_t>(1, unsigned_value(o, "jobs")));
    return plan;
}

std::string factors_text(const TheoremBound& b) {
    std::string s;
    for (const auto& f : b.factors) {
        if (!s.empty()) s += ";";
        s += f.name + "=" + format_number(f.value) + "^" + format_number(f.exponent);
    }
    return s;
}

const std::vector<std::string> kRatioColumns = {"theorem", "weight", "n", "L", "p0", "q0", "p", "q", "alpha", "eta",
                                                "theta", "factors", "empirical", "bound", "ratio", "witness",
                                                "trials", "seed"};

std::vector<json> ratio_row(const RatioReport& r, const std::string& weight, int depth) {
    const auto& e = r.bound.e;
    return {to_string(r.bound.id), weight, e.n, depth, number(e.p0), number(e.q0), number(e.p), number(e.q),
            number(e.alpha), number(r.bound.eta), r.bound.theta ? json(*r.bound.theta) : json(""),
            factors_text(r.bound), number(r.empirical), number(r.bound.value), number(r.ratio), r.witness,
            r.trials, std::to_string(r.seed)};
}

Result verify_maximal(const Options& o, const std::string& id) {
    const GridSpec g = parse_grid_spec(o.get("grid"));
    const TrialPlan plan = plan_of(o);
    Table t{"verify", {"check", "n", "L", "p", "q", "alpha", "trials", "seed", "max_ratio", "constant", "violations",
                       "worst_trial"}, {}};
    Result r;
    if (id == "prop2.7") {
        const double p = num(o, "p"), alpha = num(o, "alpha");
        const double q = o.has("q") ? num(o, "q") : 1.0 / (1.0 / p - alpha / g.dimension);
        const auto c = maximal_strong_check(g.dimension, g.depth, p, q, alpha, plan);
        t.add({id, g.dimension, g.depth, number(p), number(q), number(alpha), c.trials, std::to_string(plan.seed),
               c.max_ratio, c.constant, c.violations, c.worst_trial});
        r.summary.push_back(pass_fail(c.violations == 0) + " prop2.7 max_ratio=" + format_number(c.max_ratio) +
                            " constant=" + format_number(c.constant));
        r.code = c.violations == 0 ? 0 : 3;
    } else if (id == "weak11") {
        const auto c = maximal_weak11_check(g.dimension, g.depth, plan);
        t.add({id, g.dimension, g.depth, 1.0, 1.0, 0.0, c.trials, std::to_string(plan.seed), c.max_ratio, c.constant,
               c.violations, c.worst_trial});
        r.summary.push_back(pass_fail(c.violations == 0) + " weak11 max_ratio=" + format_number(c.max_ratio) +
                            " constant=1");
        r.code = c.violations == 0 ? 0 : 3;
    } else {
        const double alpha = num(o, "alpha");
        const auto c = maximal_endpoint_probe(g.dimension, g.depth, alpha, plan);
        const double r_exp = g.dimension / (g.dimension - alpha);
        t.add({id, g.dimension, g.depth, 1.0, r_exp, number(alpha), c.trials, std::to_string(plan.seed), c.max_ratio,
               c.constant, c.violations, c.worst_trial});
        r.summary.push_back("INFO endpoint weak(1," + format_number(r_exp) + ") max_ratio=" +
                            format_number(c.max_ratio) + " (reported, not asserted)");
    }
    r.tables.push_back(t);
    return r;
}

Result verify_cz(const Options& o) {
    const GridSpec g = parse_grid_spec(o.get("grid"));
    const TrialPlan plan = plan_of(o);
    const auto c = cz_check(g.dimension, g.depth, plan);
    Table t{"verify", {"check", "value", "limit", "status"}, {}};
    Result r;
    auto add = [&](const std::string& name, double value, double limit, bool ok) {
        t.add({name, value, limit, pass_fail(ok)});
        r.summary.push_back(pass_fail(ok) + " cz." + name + " value=" + format_number(value) +
                            " limit=" + format_number(limit));
        if (!ok) r.code = 3;
    };
    add("root-below-lambda", static_cast<double>(c.root_exceeds), 0, c.root_exceeds == 0);
    add("sum-exact-mismatch-cells", static_cast<double>(c.sum_mismatch_cells), 0, c.sum_mismatch_cells == 0);
    add("sum-relative-error", c.max_sum_error, 0x1p-52, c.max_sum_error <= 0x1p-52);
    add("cancellation", c.max_cancellation, 1e-12, c.max_cancellation <= 1e-12);
    add("mass", c.max_mass_error, 1e-12, c.max_mass_error <= 1e-12);
    add("omega-measure", c.max_omega_ratio, 1.0, c.max_omega_ratio <= 1.0 + 1e-12);
    add("good-sup", c.max_linf_ratio, 1.0, c.max_linf_ratio <= 1.0 + 1e-12);
    add("cube-mass-identity", c.max_identity_error, 1e-12, c.max_identity_error <= 1e-12);
    r.tables.push_back(t);
    return r;
}

Result verify_theorem(const Options& o, const std::string& id) {
    const auto grid = standard_grid(o);
    const ExponentTuple e = exponent_tuple(o, grid->dimension());
    const TheoremId tid = parse_theorem(id, e.q0);
    const Weight w(parse_function_spec(o.get("weight"), grid->lattice()));
    const SparseFamily s = make_family(o, grid, e.p0);
    const auto grids = all_shifted_grids(grid->lattice());
    const RatioReport rep = theorem_ratio(tid, s, w, e, grids, plan_of(o));
    Table t{"verify", kRatioColumns, {}};
    t.add(ratio_row(rep, o.get("weight"), grid->depth()));
    const bool ok = std::isfinite(rep.ratio) && std::isfinite(rep.bound.value);
    return {{t},
            {pass_fail(ok) + " " + to_string(tid) + " ratio=" + format_number(rep.ratio) + " (finite ratio required)"},
            ok ? 0 : 3};
}

Result cmd_verify(const Options& o, const std::string& id) {
    if (id == "prop2.7" || id == "weak11" || id == "endpoint") return verify_maximal(o, id);
    if (id == "cz") return verify_cz(o);
    if (id == "thm1.1" || id == "thm1.3" || id == "thmA") return verify_theorem(o, id);
    throw std::invalid_argument("verify: unknown id '" + id + "' (prop2.7, weak11, endpoint, cz, thm1.1, thm1.3, thmA)");
}

Result cmd_sweep(const Options& o, const std::string& id) {
    if (id != "thm1.1" && id != "thm1.3" && id != "thmA")
        throw std::invalid_argument("sweep: unknown id '" + id + "' (thm1.1, thm1.3, thmA)");
    const auto grid = standard_grid(o);
    const ExponentTuple e = exponent_tuple(o, grid->dimension());
    const TheoremId tid = parse_theorem(id, e.q0);
    const SparseFamily s = make_family(o, grid, e.p0);
    const auto grids = all_shifted_grids(grid->lattice());
    const TrialPlan plan = plan_of(o);
    const double tol = num(o, "tol");

    Table t{"sweep", kRatioColumns, {}};
    t.columns.insert(t.columns.begin() + 2, "parameter");
    std::vector<double> bounds, empirical;
    bool finite = true;
    for (const auto& member : parse_family_spec(o.get("family"))) {
        const Weight w(parse_function_spec(member.spec, grid->lattice()));
        const RatioReport rep = theorem_ratio(tid, s, w, e, grids, plan);
        auto row = ratio_row(rep, member.spec, grid->depth());
        row.insert(row.begin() + 2, member.parameter);
        t.add(std::move(row));
        bounds.push_back(rep.bound.value);
        empirical.push_back(rep.empirical);
        finite = finite && std::isfinite(rep.ratio);
    }
    Result r{{t}, {}, 0};
    const SlopeFit fit = scaling_slope(bounds, empirical);
    const bool ok = finite && fit.slope <= 1.0 + tol;
    r.summary.push_back(pass_fail(ok) + " " + to_string(tid) + " slope=" + format_number(fit.slope) +
                        " r2=" + format_number(fit.r_squared) + " threshold=" + format_number(1.0 + tol) +
                        " members=" + std::to_string(bounds.size()));
    r.code = ok ? 0 : 3;
    return r;
}

Result cmd_extremal(const Options& o, const std::string& objective_name) {
    const auto grid = standard_grid(o);
    const ExponentTuple e = exponent_tuple(o, grid->dimension());
    const SearchObjective objective = parse_objective(objective_name);
    const Weight w0(parse_function_spec(o.get("weight"), grid->lattice()));
    const auto iterations = unsigned_value(o, "iterations");
    const SearchResult res = extremal_search(objective, e, *grid, w0, unsigned_value(o, "seed"), iterations);

    Table summary{"search", {"objective", "initial_ratio", "best_ratio", "accepted", "iterations", "seed", "empirical",
                             "bound", "factors"}, {}};
    summary.add({to_string(objective), res.initial_ratio, res.best_ratio, res.accepted, res.iterations,
                 std::to_string(res.seed), res.empirical, res.bound.value, factors_text(res.bound)});
    Table cells{"witness", {"cell", "weight", "input"}, {}};
    for (std::size_t c = 0; c < res.input.size(); ++c) cells.add({c, res.weight[c], res.input[c]});
    return {{summary, cells},
            {"best_ratio=" + format_number(res.best_ratio) + " initial_ratio=" + format_number(res.initial_ratio) +
             " accepted=" + std::to_string(res.accepted)},
            0};
}

// ---------------------------------------------------------------------------
// Emission

void emit_csv(std::ostream& os, const std::vector<Table>& tables) {
    for (const auto& t : tables) {
        if (tables.size() > 1) os << "# table " << t.name << '\n';
        for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
        os << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(cell_text(row[i]));
            os << '\n';
        }
    }
}

void emit_table(std::ostream& os, const std::vector<Table>& tables) {
    for (const auto& t : tables) {
        std::vector<std::size_t> width(t.columns.size());
        std::vector<std::vector<std::string>> text;
        for (std::size_t i = 0; i < t.columns.size(); ++i) width[i] = t.columns[i].size();
        for (const auto& row : t.rows) {
            std::vector<std::string> line;
            for (std::size_t i = 0; i < row.size(); ++i) {
                line.push_back(row[i].is_number_float() ? format_number(row[i].get<double>()) : cell_text(row[i]));
                width[i] = std::max(width[i], line.back().size());
            }
            text.push_back(std::move(line));
        }
        auto print = [&](const std::vector<std::string>& line) {
            for (std::size_t i = 0; i < line.size(); ++i)
                os << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << line[i];
            os << '\n';
        };
        print(t.columns);
        for (const auto& line : text) print(line);
    }
}

json tables_json(const std::vector<Table>& tables) {
    json out = json::object();
    for (const auto& t : tables) {
        json rows = json::array();
        for (const auto& row : t.rows) {
            json obj;
            for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = row[i];
            rows.push_back(obj);
        }
        out[t.name] = rows;
    }
    return out;
}

std::string hex64(std::uint64_t x) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

const std::map<std::string, std::string>& grid_defaults() {
    static const std::map<std::string, std::string> d = {
        {"constants", "n=1,L=4"}, {"czd", "n=1,L=4"},       {"sparse-eval", "n=1,L=4"}, {"maximal", "n=1,L=4"},
        {"prop2.7", "n=1,L=10"},  {"weak11", "n=1,L=10"},   {"endpoint", "n=1,L=10"},   {"cz", "n=1,L=8"},
        {"thm1.1", "n=1,L=8"},    {"thm1.3", "n=1,L=8"},    {"thmA", "n=1,L=8"},        {"extremal", "n=1,L=6"},
    };
    return d;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dyadic sparse-domination laboratory"};
    app.name("sdlab");
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    o.bind(app, "config", "JSON file of option values (command-line flags take precedence)");
    o.bind(app, "grid", "grid spec n=<n>,L=<L>[,a=<a1>:...]");
    o.bind(app, "weight", "weight spec (const:, power:, random:, indicator:)");
    o.bind(app, "function", "function spec");
    o.bind(app, "g", "second function for the bilinear form (sparse-eval)");
    for (const char* name : {"p", "q", "s", "eta", "alpha", "p0", "q0", "lambda", "tol"})
        o.bind(app, name, std::string("exponent or parameter ") + name);
    o.bind(app, "sparse", "sparse family: chain:<cell> | stopping[:rho=<r>] | file:<path>[,eta=<eta>]");
    o.bind(app, "family", "weight family, e.g. power:a=0..0.9:10");
    o.bind(app, "seed", "master seed");
    o.bind(app, "trials", "trials per ratio or check");
    o.bind(app, "jobs", "worker threads");
    o.bind(app, "iterations", "extremal search iterations");
    o.bind(app, "out", "write the data to this file instead of stdout");
    o.bind(app, "format", "csv | json | table");
    o.bind(app, "family-out", "sparse-eval: write the family as CSV");

    std::string target;
    auto* c_constants = app.add_subcommand("constants", "weight characteristics of --weight");
    auto* c_czd = app.add_subcommand("czd", "Calderon-Zygmund decomposition of --function at --lambda");
    auto* c_sparse = app.add_subcommand("sparse-eval", "sparse family, sparse operator and bilinear form");
    auto* c_maximal = app.add_subcommand("maximal", "dyadic fractional maximal function");
    auto* c_verify = app.add_subcommand("verify", "run one verification");
    c_verify->add_option("id", target, "prop2.7 | weak11 | endpoint | cz | thm1.1 | thm1.3 | thmA")->required();
    auto* c_sweep = app.add_subcommand("sweep", "ratio sweep over a weight family with a scaling slope");
    c_sweep->add_option("id", target, "thm1.1 | thm1.3 | thmA")->required();
    auto* c_extremal = app.add_subcommand("extremal", "local search for large ratios");
    c_extremal->add_option("objective", target, "thm1.1 | thm1.1-noD | thm1.3 | thmA")->required();
    (void)c_constants;
    (void)c_czd;
    (void)c_sparse;
    (void)c_maximal;

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        if (o.has("config")) {
            std::ifstream in(o.get("config"));
            if (!in) throw std::invalid_argument("cannot open config '" + o.get("config") + "'");
            json config;
            try {
                config = json::parse(in);
            } catch (const json::parse_error& e) {
                throw std::invalid_argument(std::string("malformed config: ") + e.what());
            }
            o.apply_config(config);
        }
        const std::string key = (command == "verify" || command == "sweep") ? target : command;
        const auto gd = grid_defaults().find(key);
        o.set_default("grid", gd != grid_defaults().end() ? gd->second : "n=1,L=8");
        o.set_default("weight", "const:1");
        o.set_default("p", "2");
        o.set_default("s", "2");
        o.set_default("alpha", "0");
        o.set_default("p0", "1");
        o.set_default("q0", "inf");
        o.set_default("tol", "0.05");
        o.set_default("sparse", command == "sparse-eval" ? "stopping:rho=2" : "chain:0");
        o.set_default("family", "power:a=0..0.9:10");
        o.set_default("seed", "1");
        o.set_default("trials", command == "verify" && (target == "prop2.7" || target == "weak11" ||
                                                        target == "endpoint" || target == "cz")
                                    ? "200"
                                    : "50");
        o.set_default("jobs", "1");
        o.set_default("iterations", "500");
        o.set_default("format", command == "constants" ? "table" : "csv");
        const std::string format = o.get("format");
        if (format != "csv" && format != "json" && format != "table")
            throw std::invalid_argument("--format must be csv, json or table");

        Result result;
        if (command == "constants") result = cmd_constants(o);
        else if (command == "czd") result = cmd_czd(o);
        else if (command == "sparse-eval") result = cmd_sparse_eval(o);
        else if (command == "maximal") result = cmd_maximal(o);
        else if (command == "verify") result = cmd_verify(o, target);
        else if (command == "sweep") result = cmd_sweep(o, target);
        else result = cmd_extremal(o, target);

        const json canonical = o.canonical(command, target);
        const std::string canon = canonical.dump();
        const std::string hash = hex64(fnv1a(canon));
        const std::string seed = o.get("seed");

        std::ostringstream data;
        if (format == "json") {
            json doc;
            doc["command"] = command;
            if (!target.empty()) doc["target"] = target;
            doc["config_hash"] = hash;
            doc["seed"] = seed;
            doc["config"] = canonical;
            doc["tables"] = tables_json(result.tables);
            doc["summary"] = result.summary;
            data << doc.dump(2) << '\n';
        } else {
            data << "# sdlab " << command << (target.empty() ? "" : " " + target) << " config_hash=" << hash
                 << " seed=" << seed << '\n';
            data << "# config " << canon << '\n';
            if (format == "csv") emit_csv(data, result.tables);
            else emit_table(data, result.tables);
        }

        if (o.has("out")) {
            std::ofstream file(o.get("out"), std::ios::binary);
            if (!file) throw std::invalid_argument("cannot write '" + o.get("out") + "'");
            file << data.str();
            if (format != "json")
                for (const auto& line : result.summary) file << "# " << line << '\n';
            out << "wrote " << o.get("out") << '\n';
        } else {
            out << data.str();
        }
        if (format != "json" || o.has("out"))
            for (const auto& line : result.summary) out << line << '\n';
        return result.code;
    } catch (const InadmissibleExponents& e) {
        err << "sdlab: inadmissible exponents: " << e.what() << '\n';
        return 1;
    } catch (const PreconditionError& e) {
        err << "sdlab: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        err << "sdlab: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "sdlab: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace sdlab::cli
