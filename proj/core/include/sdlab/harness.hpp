#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdlab/dyadic_grid.hpp"
#include "sdlab/exponents.hpp"
#include "sdlab/grid_function.hpp"
#include "sdlab/sparse_forms.hpp"

namespace sdlab {

// ---------------------------------------------------------------------------
// Seeding

std::uint64_t splitmix64(std::uint64_t x);
/// Independent stream for trial i of a run with the given master seed.
std::uint64_t trial_seed(std::uint64_t master, std::size_t i);

struct TrialPlan {
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
};

// ---------------------------------------------------------------------------
// Theoretical bounds

enum class TheoremId { ThmA, Thm11, Thm13Finite, Thm13Infinite, Prop27 };

const char* to_string(TheoremId id);
/// Accepts "thmA", "thm1.1", "thm1.3" (case picked from q0), "thm1.3-finite",
/// "thm1.3-infinite" and "prop2.7".
TheoremId parse_theorem(std::string_view name, double q0 = kInfinity);

struct BoundFactor {
    std::string name;
    double value = 0.0;
    double exponent = 1.0;
};

struct TheoremBound {
    TheoremId id = TheoremId::Thm11;
    ExponentTuple e;
    double eta = 1.0;
    std::vector<BoundFactor> factors;
    double value = 0.0;
    std::optional<double> theta;

    /// Bound with the named factor left out (1 if absent).
    [[nodiscard]] double without(std::string_view factor) const;
};

/// theta = max{ (q0/q)' (1 - alpha/n)/q0', (1/p0 - alpha/(n q0')) / (q (1/p0 - 1/p)) }; needs p0 < p.
double theta_exponent(const ExponentTuple& e);

/// Assembles the bound of the given theorem from the weight constants of w over
/// `grids`. eta is the sparsity of the family (used by Thm11 only).
TheoremBound theoretical_bound(TheoremId id, const ExponentTuple& e, const Weight& w, double eta,
                               std::span<const Grid> grids);

// ---------------------------------------------------------------------------
// Trial inputs

struct SetTrial {
    std::string label;
    CellSet cells;
};
struct FunctionTrial {
    std::string label;
    GridFunction f;
};

/// Initial segments [0, 2^-k)^n for every level k, then random unions of dyadic cubes.
std::vector<SetTrial> set_trials(const Grid& grid, std::size_t random_count, std::uint64_t seed);
/// Log-normal functions, then random dyadic indicators every third trial.
std::vector<FunctionTrial> function_trials(const Grid& grid, std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Ratios

struct RatioReport {
    TheoremBound bound;
    double empirical = 0.0;
    double ratio = 0.0;
    std::size_t witness_trial = 0;
    std::string witness;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

/// ||T chi_F||_{L^{q,inf}(w^q)} / ||chi_F||_{L^{p,1}(w^p)} with T = A^{alpha/q0'}_S.
double restricted_weak_value(const SparseFamily& s, const Weight& w, const ExponentTuple& e,
                             std::span<const std::size_t> f_cells);
/// ||w T(w^{-1} f)||_{L^{q,inf}} / ||f||_{L^p}.
double multiplier_weak_value(const SparseFamily& s, const Weight& w, const ExponentTuple& e, const GridFunction& f);
/// ||T f||_{L^q(w^q)} / ||f||_{L^p(w^p)}.
double strong_value(const SparseFamily& s, const Weight& w, const ExponentTuple& e, const GridFunction& f);

RatioReport restricted_weak_ratio(const SparseFamily& s, const Weight& w, const ExponentTuple& e,
                                  std::span<const SetTrial> trials, std::span<const Grid> grids, const TrialPlan& plan);
RatioReport multiplier_weak_ratio(const SparseFamily& s, const Weight& w, const ExponentTuple& e,
                                  std::span<const FunctionTrial> trials, std::span<const Grid> grids,
                                  const TrialPlan& plan);
RatioReport strong_ratio(const SparseFamily& s, const Weight& w, const ExponentTuple& e,
                         std::span<const FunctionTrial> trials, std::span<const Grid> grids, const TrialPlan& plan);

/// Ratio report of Thm11, Thm13 (either case) or ThmA with default trials drawn from `plan`.
RatioReport theorem_ratio(TheoremId id, const SparseFamily& s, const Weight& w, const ExponentTuple& e,
                          std::span<const Grid> grids, const TrialPlan& plan);

// ---------------------------------------------------------------------------
// Scaling

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least-squares slope of log(empirical) against log(bound). Requires at least
/// four points with strictly increasing bounds and positive empirical values.
SlopeFit scaling_slope(std::span<const double> bounds, std::span<const double> empirical);

// ---------------------------------------------------------------------------
// Extremal search

enum class SearchObjective { Thm11, Thm11NoDoubling, Thm13, ThmA };

const char* to_string(SearchObjective o);
SearchObjective parse_objective(std::string_view name);

struct SearchResult {
    double initial_ratio = 0.0;
    double best_ratio = 0.0;
    std::size_t accepted = 0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    Weight weight;
    GridFunction input;  // chi_F for Thm11 objectives
    TheoremBound bound;
    double empirical = 0.0;
};

/// Hill climbing on the ratio over weights (multiplicative moves on single cells
/// and on dyadic blocks) and inputs (block toggles for sets, cell moves for
/// functions). Only strict improvements are accepted. The sparse family is the
/// chain through cell 0 of the standard grid.
SearchResult extremal_search(SearchObjective objective, const ExponentTuple& e, const Grid& grid, const Weight& w0,
                             std::uint64_t seed, std::size_t iterations);

// ---------------------------------------------------------------------------
// Maximal-operator and decomposition experiments

struct MaximalCheck {
    std::size_t trials = 0;
    double constant = 0.0;
    double max_ratio = 0.0;  // max of lhs / rhs over trials
    std::size_t worst_trial = 0;
    std::size_t violations = 0;  // lhs > constant * rhs * (1 + slack)
};

/// ||M_{alpha,u} f||_{L^q(u)} <= (1 + p'/q)^{1-alpha/n} ||f||_{L^p(u)} on random (f, u).
MaximalCheck maximal_strong_check(int n, int depth, double p, double q, double alpha, const TrialPlan& plan,
                                  double slack = 1e-10);
/// ||M_u f||_{L^{1,inf}(u)} <= ||f||_{L^1(u)} on the same instances.
MaximalCheck maximal_weak11_check(int n, int depth, const TrialPlan& plan, double slack = 1e-10);
/// ||M_{alpha,u} f||_{L^{n/(n-alpha),inf}(u)} / ||f||_{L^1(u)}: reported only, never asserted.
MaximalCheck maximal_endpoint_probe(int n, int depth, double alpha, const TrialPlan& plan);

struct CZCheck {
    std::size_t trials = 0;
    std::size_t root_exceeds = 0;
    std::size_t sum_mismatch_cells = 0;  // cells where g + b != h bitwise
    double max_sum_error = 0.0;          // |g + b - h| / max|h|
    double max_cancellation = 0.0;       // |int_P b du| / int_P h du
    double max_mass_error = 0.0;         // | ||g||_1 - ||h||_1 | / ||h||_1
    double max_omega_ratio = 0.0;        // u(Omega) lambda / ||h||_1
    double max_linf_ratio = 0.0;         // ||g||_inf / (D^{2^-n}_u lambda)
    double max_identity_error = 0.0;     // int_Q h du vs int_Q g du on cubes not strictly inside Omega
    std::size_t maximal_cubes = 0;
};

/// Random (h, u, lambda) instances with lambda above the top-cube averages.
CZCheck cz_check(int n, int depth, const TrialPlan& plan);

}  // namespace sdlab
