#include "sdlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <random>
#include <stdexcept>
#include <thread>

#include "sdlab/cz_decomposition.hpp"
#include "sdlab/maximal.hpp"
#include "sdlab/weight_constants.hpp"

namespace sdlab {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t i) {
    return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(i)));
}

namespace {

/// Evaluates fn(0..n-1) on up to `jobs` threads; results are stored by index so
/// any later reduction is independent of scheduling.
template <typename Fn>
std::vector<double> parallel_values(std::size_t n, unsigned jobs, Fn fn) {
    std::vector<double> out(n, 0.0);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += workers) out[i] = fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

/// First index attaining the maximum.
std::size_t argmax(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

CellSet random_union(const Grid& grid, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_int_distribution<int> level(0, grid.depth());
    std::vector<char> in(grid.cell_count(), 0);
    const int m = count(rng);
    for (int j = 0; j < m; ++j) {
        const int k = level(rng);
        std::uniform_int_distribution<std::size_t> pick(grid.level_begin(k), grid.level_end(k) - 1);
        for (std::size_t c : grid.cells(pick(rng))) in[c] = 1;
    }
    CellSet out;
    for (std::size_t c = 0; c < in.size(); ++c)
        if (in[c]) out.push_back(c);
    return out;
}

double lp_norm(const GridFunction& f, const Weight& u, double r) {
    if (std::isinf(r)) return f.max_abs();
    return lorentz_norms(f, u, r).lr;
}

}  // namespace

// ---------------------------------------------------------------------------

const char* to_string(TheoremId id) {
    switch (id) {
        case TheoremId::ThmA: return "thmA";
        case TheoremId::Thm11: return "thm1.1";
        case TheoremId::Thm13Finite: return "thm1.3-finite";
        case TheoremId::Thm13Infinite: return "thm1.3-infinite";
        case TheoremId::Prop27: return "prop2.7";
    }
    return "?";
}

TheoremId parse_theorem(std::string_view name, double q0) {
    if (name == "thmA" || name == "thma") return TheoremId::ThmA;
    if (name == "thm1.1") return TheoremId::Thm11;
    if (name == "thm1.3") return std::isinf(q0) ? TheoremId::Thm13Infinite : TheoremId::Thm13Finite;
    if (name == "thm1.3-finite") return TheoremId::Thm13Finite;
    if (name == "thm1.3-infinite") return TheoremId::Thm13Infinite;
    if (name == "prop2.7") return TheoremId::Prop27;
    throw std::invalid_argument("unknown theorem id: " + std::string(name));
}

double TheoremBound::without(std::string_view factor) const {
    double v = 1.0;
    for (const auto& f : factors)
        if (f.name != factor) v *= std::pow(f.value, f.exponent);
    return v;
}

double theta_exponent(const ExponentTuple& e) {
    e.validate();
    if (!(e.p0 < e.p)) throw InadmissibleExponents("theta requires p0 < p");
    const double q0c = e.q0_conj();
    const double t1 = e.rh_index() * (1.0 - e.alpha / e.n) / q0c;
    const double t2 = (1.0 / e.p0 - e.alpha / (e.n * q0c)) / (e.q * (1.0 / e.p0 - 1.0 / e.p));
    return std::max(t1, t2);
}

TheoremBound theoretical_bound(TheoremId id, const ExponentTuple& e, const Weight& w, double eta,
                               std::span<const Grid> grids) {
    if (grids.empty()) throw std::invalid_argument("theoretical_bound requires at least one grid");
    TheoremBound b;
    b.id = id;
    b.e = e;
    b.eta = eta;
    b.value = 1.0;
    auto add = [&](std::string name, double value, double exponent) {
        if (!std::isfinite(value)) throw std::domain_error(name + " is infinite: weight outside class");
        b.factors.push_back({std::move(name), value, exponent});
        b.value *= std::pow(value, exponent);
    };

    if (id == TheoremId::Prop27) {
        add("(1+p'/q)^(1-alpha/n)", maximal_strong_constant(e.p, e.q, e.alpha, e.n), 1.0);
        return b;
    }

    e.validate();
    const Weight wq = w.pow(e.q);
    const double r = e.rh_index();
    switch (id) {
        case TheoremId::Thm11: {
            if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
            const double alpha_r = e.p0 * e.alpha / e.q0_conj();
            add("[w^q]_AR", ar_pq_constant(w.pow(e.p0), e.p / e.p0, e.q / e.p0, alpha_r, grids).value, 1.0 / e.p0);
            add("[w^q]_RH", rh_constant(wq, r, grids).value, r + 1.0 / e.q);
            add("D^eta", doubling_constant(wq, eta, grids).value, 1.0);
            add("D^2^n", doubling_constant(wq, std::ldexp(1.0, -e.n), grids).value, 1.0 / e.q);
            break;
        }
        case TheoremId::Thm13Infinite:
        case TheoremId::Thm13Finite: {
            const bool infinite = std::isinf(e.q0);
            if (infinite != (id == TheoremId::Thm13Infinite))
                throw std::invalid_argument(std::string(to_string(id)) + " does not match q0 = " + e.to_string());
            add("[w^q]_A", ap_constant(wq, e.ap_index(), grids).value, 1.0 / e.q);
            if (infinite)
                add("[w^q]_Ainf", fujii_wilson(wq, grids).value, 1.0);
            else
                add("[w^q]_RH", rh_constant(wq, r, grids).value, r + 2.0 / e.q);
            break;
        }
        case TheoremId::ThmA: {
            const double theta = theta_exponent(e);
            b.theta = theta;
            add("[w^q]_A", ap_constant(wq, e.ap_index(), grids).value, theta);
            add("[w^q]_RH", rh_constant(wq, r, grids).value, theta);
            break;
        }
        case TheoremId::Prop27: break;
    }
    return b;
}

// ---------------------------------------------------------------------------

std::vector<SetTrial> set_trials(const Grid& grid, std::size_t random_count, std::uint64_t seed) {
    if (!grid.spec().is_standard()) throw std::invalid_argument("set_trials expects the standard grid");
    std::vector<SetTrial> out;
    for (int k = 0; k <= grid.depth(); ++k) {
        const auto cells = grid.cells(grid.level_begin(k));
        out.push_back({"segment:k=" + std::to_string(k), CellSet(cells.begin(), cells.end())});
    }
    for (std::size_t i = 0; i < random_count; ++i) {
        std::mt19937_64 rng(trial_seed(seed, i));
        out.push_back({"union:" + std::to_string(i), random_union(grid, rng)});
    }
    return out;
}

std::vector<FunctionTrial> function_trials(const Grid& grid, std::size_t count, std::uint64_t seed) {
    std::vector<FunctionTrial> out;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t s = trial_seed(seed, i);
        if (i % 3 == 2) {
            std::mt19937_64 rng(s);
            out.push_back({"union:" + std::to_string(i),
                           GridFunction::indicator(grid.lattice(), random_union(grid, rng))});
        } else {
            out.push_back({"lognormal:" + std::to_string(i),
                           synthesize(RandomSpec{s, RandomKind::LogNormal, 0.0, 1.0, 1.5}, grid.lattice())});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

double restricted_weak_value(const SparseFamily& s, const Weight& w, const ExponentTuple& e,
                             std::span<const std::size_t> f_cells) {
    if (f_cells.empty()) throw std::invalid_argument("restricted weak ratio needs a nonempty set");
    const GridFunction chi = GridFunction::indicator(w.lattice(), f_cells);
    const GridFunction tf = sparse_operator(s, chi, e.operator_order());
    const double num = lorentz_norms(tf, w.pow(e.q), e.q).lr_weak;
    const double den = e.p * std::pow(w.pow(e.p).measure(f_cells), 1.0 / e.p);
    return num / den;
}

double multiplier_weak_value(const SparseFamily& s, const Weight& w, const ExponentTuple& e, const GridFunction& f) {
    const Weight one = Weight::lebesgue(w.lattice());
    const double den = lorentz_norms(f, one, e.p).lr;
    if (den == 0.0) return 0.0;
    const GridFunction mf = multiplier_eval(s, f, w, e.operator_order());
    return lorentz_norms(mf, one, e.q).lr_weak / den;
}

double strong_value(const SparseFamily& s, const Weight& w, const ExponentTuple& e, const GridFunction& f) {
    const double den = lorentz_norms(f, w.pow(e.p), e.p).lr;
    if (den == 0.0) return 0.0;
    const GridFunction tf = sparse_operator(s, f, e.operator_order());
    return lorentz_norms(tf, w.pow(e.q), e.q).lr / den;
}

namespace {

template <typename Trial, typename Value>
RatioReport ratio_report(TheoremBound bound, std::span<const Trial> trials, const TrialPlan& plan, Value value) {
    if (trials.empty()) throw std::invalid_argument("ratio requires at least one trial");
    const auto v = parallel_values(trials.size(), plan.jobs, [&](std::size_t i) { return value(trials[i]); });
    const std::size_t best = argmax(v);
    RatioReport r;
    r.bound = std::move(bound);
    r.empirical = v[best];
    r.ratio = r.empirical / r.bound.value;
    r.witness_trial = best;
    r.witness = trials[best].label;
    r.trials = trials.size();
    r.seed = plan.seed;
    return r;
}

}  // namespace

RatioReport restricted_weak_ratio(const SparseFamily& s, const Weight& w, const ExponentTuple& e,
                                  std::span<const SetTrial> trials, std::span<const Grid> grids, const TrialPlan& plan) {
    auto bound = theoretical_bound(TheoremId::Thm11, e, w, s.eta, grids);
    return ratio_report(std::move(bound), trials, plan,
                        [&](const SetTrial& t) { return restricted_weak_value(s, w, e, t.cells); });
}

RatioReport multiplier_weak_ratio(const SparseFamily& s, const Weight& w, const ExponentTuple& e,
                                  std::span<const FunctionTrial> trials, std::span<const Grid> grids,
                                  const TrialPlan& plan) {
    const TheoremId id = std::isinf(e.q0) ? TheoremId::Thm13Infinite : TheoremId::Thm13Finite;
    auto bound = theoretical_bound(id, e, w, s.eta, grids);
    return ratio_report(std::move(bound), trials, plan,
                        [&](const FunctionTrial& t) { return multiplier_weak_value(s, w, e, t.f); });
}

RatioReport strong_ratio(const SparseFamily& s, const Weight& w, const ExponentTuple& e,
                         std::span<const FunctionTrial> trials, std::span<const Grid> grids, const TrialPlan& plan) {
    auto bound = theoretical_bound(TheoremId::ThmA, e, w, s.eta, grids);
    return ratio_report(std::move(bound), trials, plan,
                        [&](const FunctionTrial& t) { return strong_value(s, w, e, t.f); });
}

RatioReport theorem_ratio(TheoremId id, const SparseFamily& s, const Weight& w, const ExponentTuple& e,
                          std::span<const Grid> grids, const TrialPlan& plan) {
    const Grid& g = *s.grid;
    switch (id) {
        case TheoremId::Thm11: {
            const auto trials = set_trials(g, plan.trials, plan.seed);
            return restricted_weak_ratio(s, w, e, trials, grids, plan);
        }
        case TheoremId::Thm13Finite:
        case TheoremId::Thm13Infinite: {
            const auto trials = function_trials(g, plan.trials, plan.seed);
            return multiplier_weak_ratio(s, w, e, trials, grids, plan);
        }
        case TheoremId::ThmA: {
            const auto trials = function_trials(g, plan.trials, plan.seed);
            return strong_ratio(s, w, e, trials, grids, plan);
        }
        case TheoremId::Prop27: break;
    }
    throw std::invalid_argument("theorem_ratio does not apply to prop2.7");
}

// ---------------------------------------------------------------------------

SlopeFit scaling_slope(std::span<const double> bounds, std::span<const double> empirical) {
    if (bounds.size() != empirical.size()) throw std::invalid_argument("scaling_slope: size mismatch");
    if (bounds.size() < 4) throw std::invalid_argument("scaling_slope needs at least 4 family members");
    for (std::size_t i = 1; i < bounds.size(); ++i)
        if (!(bounds[i] > bounds[i - 1]))
            throw std::invalid_argument("scaling_slope: degenerate family (bounds not strictly increasing)");
    const auto n = static_cast<double>(bounds.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (!(bounds[i] > 0.0) || !(empirical[i] > 0.0))
            throw std::invalid_argument("scaling_slope: values must be positive");
        const double x = std::log(bounds[i]), y = std::log(empirical[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double vxx = sxx - sx * sx / n, vxy = sxy - sx * sy / n, vyy = syy - sy * sy / n;
    SlopeFit fit;
    fit.slope = vxy / vxx;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.r_squared = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
    return fit;
}

// ---------------------------------------------------------------------------

const char* to_string(SearchObjective o) {
    switch (o) {
        case SearchObjective::Thm11: return "thm1.1";
        case SearchObjective::Thm11NoDoubling: return "thm1.1-noD";
        case SearchObjective::Thm13: return "thm1.3";
        case SearchObjective::ThmA: return "thmA";
    }
    return "?";
}

SearchObjective parse_objective(std::string_view name) {
    if (name == "thm1.1") return SearchObjective::Thm11;
    if (name == "thm1.1-noD") return SearchObjective::Thm11NoDoubling;
    if (name == "thm1.3") return SearchObjective::Thm13;
    if (name == "thmA" || name == "thma") return SearchObjective::ThmA;
    throw std::invalid_argument("unknown search objective: " + std::string(name));
}

SearchResult extremal_search(SearchObjective objective, const ExponentTuple& e, const Grid& grid, const Weight& w0,
                             std::uint64_t seed, std::size_t iterations) {
    if (iterations < 1) throw std::invalid_argument("extremal_search needs at least one iteration");
    if (!grid.spec().is_standard()) throw std::invalid_argument("extremal_search runs on the standard grid");
    e.validate();
    const auto grid_ptr = std::make_shared<const Grid>(grid);
    const SparseFamily family = chain_family(grid_ptr, 0);
    const auto grids = all_shifted_grids(grid.lattice());
    const bool set_input = objective == SearchObjective::Thm11 || objective == SearchObjective::Thm11NoDoubling;

    struct Eval {
        double ratio;
        double empirical;
        TheoremBound bound;
    };
    auto evaluate = [&](const Weight& w, const GridFunction& input) {
        Eval ev{};
        switch (objective) {
            case SearchObjective::Thm11:
            case SearchObjective::Thm11NoDoubling: {
                CellSet cells;
                for (std::size_t c = 0; c < input.size(); ++c)
                    if (input[c] != 0.0) cells.push_back(c);
                ev.bound = theoretical_bound(TheoremId::Thm11, e, w, family.eta, grids);
                ev.empirical = restricted_weak_value(family, w, e, cells);
                const double denom =
                    objective == SearchObjective::Thm11 ? ev.bound.value : ev.bound.without("D^eta");
                ev.ratio = ev.empirical / denom;
                break;
            }
            case SearchObjective::Thm13: {
                const TheoremId id = std::isinf(e.q0) ? TheoremId::Thm13Infinite : TheoremId::Thm13Finite;
                ev.bound = theoretical_bound(id, e, w, family.eta, grids);
                ev.empirical = multiplier_weak_value(family, w, e, input);
                ev.ratio = ev.empirical / ev.bound.value;
                break;
            }
            case SearchObjective::ThmA: {
                ev.bound = theoretical_bound(TheoremId::ThmA, e, w, family.eta, grids);
                ev.empirical = strong_value(family, w, e, input);
                ev.ratio = ev.empirical / ev.bound.value;
                break;
            }
        }
        return ev;
    };

    GridFunction input = set_input ? GridFunction::indicator(grid.lattice(), grid.cells(grid.level_begin(std::min(1, grid.depth()))))
                                   : GridFunction::constant(grid.lattice(), 1.0);
    Weight w = w0;
    Eval best = evaluate(w, input);
    SearchResult result{best.ratio, best.ratio, 0, iterations, seed, w, input, best.bound, best.empirical};

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> level(0, grid.depth());
    std::normal_distribution<double> step(0.0, 0.5);
    std::bernoulli_distribution weight_move(0.5);
    constexpr double kLo = 1e-100, kHi = 1e100;

    for (std::size_t it = 0; it < iterations; ++it) {
        const bool move_weight = weight_move(rng);
        const int k = level(rng);
        std::uniform_int_distribution<std::size_t> pick(grid.level_begin(k), grid.level_end(k) - 1);
        const auto block = grid.cells(pick(rng));
        const double factor = std::exp(step(rng));

        std::vector<double> wv(w.values().begin(), w.values().end());
        std::vector<double> iv(input.values().begin(), input.values().end());
        bool valid = true;
        if (move_weight) {
            for (std::size_t c : block) {
                wv[c] *= factor;
                valid = valid && wv[c] > kLo && wv[c] < kHi;
            }
        } else if (set_input) {
            const bool all_in = std::all_of(block.begin(), block.end(), [&](std::size_t c) { return iv[c] != 0.0; });
            for (std::size_t c : block) iv[c] = all_in ? 0.0 : 1.0;
            valid = std::any_of(iv.begin(), iv.end(), [](double x) { return x != 0.0; });
        } else {
            for (std::size_t c : block) {
                iv[c] *= factor;
                valid = valid && iv[c] > kLo && iv[c] < kHi;
            }
        }
        if (!valid) continue;
        Weight cand_w{GridFunction(grid.lattice(), std::move(wv))};
        GridFunction cand_in(grid.lattice(), std::move(iv));
        Eval ev;
        try {
            ev = evaluate(cand_w, cand_in);
        } catch (const std::domain_error&) {
            continue;
        }
        if (std::isfinite(ev.ratio) && ev.ratio > best.ratio) {
            best = ev;
            w = std::move(cand_w);
            input = std::move(cand_in);
            ++result.accepted;
        }
    }
    result.best_ratio = best.ratio;
    result.weight = w;
    result.input = input;
    result.bound = best.bound;
    result.empirical = best.empirical;
    return result;
}

// ---------------------------------------------------------------------------

namespace {

struct MaximalInstance {
    GridFunction f;
    Weight u;
};

MaximalInstance maximal_instance(const Grid& grid, std::uint64_t seed, std::size_t i) {
    const std::uint64_t s = trial_seed(seed, i);
    std::mt19937_64 rng(s);
    GridFunction f = (i % 3 == 0) ? GridFunction::indicator(grid.lattice(), random_union(grid, rng))
                                  : synthesize(RandomSpec{s, RandomKind::LogNormal, 0.0, 1.0, 2.0}, grid.lattice());
    Weight u(synthesize(RandomSpec{splitmix64(s), RandomKind::LogNormal, 0.0, 1.0, 1.5}, grid.lattice()));
    return {std::move(f), std::move(u)};
}

template <typename Ratio>
MaximalCheck maximal_check(const Grid& grid, double constant, const TrialPlan& plan, double slack, Ratio ratio) {
    const auto v = parallel_values(plan.trials, plan.jobs, [&](std::size_t i) {
        const auto inst = maximal_instance(grid, plan.seed, i);
        return ratio(inst.f, inst.u);
    });
    MaximalCheck c;
    c.trials = plan.trials;
    c.constant = constant;
    if (!v.empty()) {
        c.worst_trial = argmax(v);
        c.max_ratio = v[c.worst_trial];
    }
    for (double r : v)
        if (r > constant * (1.0 + slack)) ++c.violations;
    return c;
}

}  // namespace

MaximalCheck maximal_strong_check(int n, int depth, double p, double q, double alpha, const TrialPlan& plan,
                                  double slack) {
    const Grid grid(GridSpec{n, depth, {}});
    const double constant = maximal_strong_constant(p, q, alpha, n);
    return maximal_check(grid, constant, plan, slack, [&](const GridFunction& f, const Weight& u) {
        const double rhs = lp_norm(f, u, p);
        return rhs == 0.0 ? 0.0 : lp_norm(dyadic_maximal(f, u, alpha, grid), u, q) / rhs;
    });
}

MaximalCheck maximal_weak11_check(int n, int depth, const TrialPlan& plan, double slack) {
    const Grid grid(GridSpec{n, depth, {}});
    return maximal_check(grid, 1.0, plan, slack, [&](const GridFunction& f, const Weight& u) {
        const double rhs = lorentz_norms(f, u, 1.0).lr;
        return rhs == 0.0 ? 0.0 : lorentz_norms(dyadic_maximal(f, u, 0.0, grid), u, 1.0).lr_weak / rhs;
    });
}

MaximalCheck maximal_endpoint_probe(int n, int depth, double alpha, const TrialPlan& plan) {
    const Grid grid(GridSpec{n, depth, {}});
    const double r = n / (n - alpha);
    return maximal_check(grid, 1.0, plan, 1e-10, [&](const GridFunction& f, const Weight& u) {
        const double rhs = lorentz_norms(f, u, 1.0).lr;
        return rhs == 0.0 ? 0.0 : lorentz_norms(dyadic_maximal(f, u, alpha, grid), u, r).lr_weak / rhs;
    });
}

CZCheck cz_check(int n, int depth, const TrialPlan& plan) {
    const Grid grid(GridSpec{n, depth, {}});
    const double m = grid.cell_measure();
    CZCheck out;
    out.trials = plan.trials;
    for (std::size_t i = 0; i < plan.trials; ++i) {
        const std::uint64_t s = trial_seed(plan.seed, i);
        std::mt19937_64 rng(s);
        GridFunction h = (i % 4 == 0) ? GridFunction::indicator(grid.lattice(), random_union(grid, rng))
                                      : synthesize(RandomSpec{s, RandomKind::LogNormal, 0.0, 1.0, 2.0}, grid.lattice());
        Weight u(synthesize(RandomSpec{splitmix64(s), RandomKind::LogNormal, 0.0, 1.0, 1.5}, grid.lattice()));
        const auto avg = weighted_averages(h, u, grid);
        double top = 0.0;
        for (std::size_t t : grid.tops()) top = std::max(top, avg[t]);
        std::uniform_real_distribution<double> lift(0.05, 4.0);
        const double lambda = top * std::exp(lift(rng));

        const auto outcome = decompose(h, u, lambda, grid);
        if (std::holds_alternative<RootExceedsThreshold>(outcome)) {
            ++out.root_exceeds;
            continue;
        }
        const auto& cz = std::get<CZDecomposition>(outcome);
        out.maximal_cubes += cz.maximal.size();

        const double hmax = h.max_abs();
        for (std::size_t c = 0; c < h.size(); ++c) {
            const double sum = cz.good[c] + cz.bad[c];
            if (sum != h[c]) ++out.sum_mismatch_cells;
            if (hmax > 0.0) out.max_sum_error = std::max(out.max_sum_error, std::abs(sum - h[c]) / hmax);
        }

        std::vector<double> hu(h.size()), gu(h.size()), bu(h.size());
        for (std::size_t c = 0; c < h.size(); ++c) {
            hu[c] = h[c] * u[c];
            gu[c] = cz.good[c] * u[c];
            bu[c] = cz.bad[c] * u[c];
        }
        const auto hs = cube_sums(grid, hu);
        const auto gs = cube_sums(grid, gu);
        const auto bs = cube_sums(grid, bu);

        std::vector<char> is_max(grid.cube_count(), 0);
        for (std::size_t id : cz.maximal) {
            is_max[id] = 1;
            if (hs[id] > 0.0) out.max_cancellation = std::max(out.max_cancellation, std::abs(bs[id]) / hs[id]);
        }

        double h1 = 0.0, g1 = 0.0;
        for (std::size_t c = 0; c < h.size(); ++c) {
            h1 += hu[c];
            g1 += gu[c];
        }
        if (h1 > 0.0) {
            out.max_mass_error = std::max(out.max_mass_error, std::abs(g1 - h1) / h1);
            out.max_omega_ratio = std::max(out.max_omega_ratio, u.measure(cz.omega) * lambda / (h1 * m));
        }

        const double d = doubling_constant(u, std::ldexp(1.0, -n), one_grid(grid)).value;
        out.max_linf_ratio = std::max(out.max_linf_ratio, cz.good.max_abs() / (d * lambda));

        std::vector<char> strictly_inside(grid.cube_count(), 0);
        for (int k = 0; k <= grid.depth(); ++k) {
            for (std::size_t id = grid.level_begin(k); id < grid.level_end(k); ++id) {
                const auto p = grid.parent(id);
                if (p && (strictly_inside[*p] || is_max[*p])) strictly_inside[id] = 1;
                if (!strictly_inside[id] && hs[id] > 0.0)
                    out.max_identity_error = std::max(out.max_identity_error, std::abs(hs[id] - gs[id]) / hs[id]);
            }
        }
    }
    return out;
}

}  // namespace sdlab
