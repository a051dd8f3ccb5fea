#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdlab/dyadic_grid.hpp"
#include "sdlab/grid_function.hpp"

namespace sdlab {

enum class Algorithm { Direct, Greedy, Brute };

const char* to_string(Algorithm a);

/// A subset E of a cube: whole cells plus at most one partially included cell.
struct SubsetWitness {
    CellSet cells;
    std::optional<std::size_t> partial_cell;
    double partial_fraction = 0.0;

    /// |E| measured in cells.
    [[nodiscard]] double cell_volume() const { return static_cast<double>(cells.size()) + (partial_cell ? partial_fraction : 0.0); }
};

/// Value of a weight characteristic with the cube (and subset) attaining it.
/// Suprema range over the cubes of the truncated grids, so `depth` is recorded
/// alongside the value.
struct ConstantReport {
    std::string name;
    double value = 0.0;
    std::optional<DyadicCube> cube;
    std::optional<SubsetWitness> subset;
    Algorithm algorithm = Algorithm::Direct;
    int depth = 0;
};

// Every constant takes the grids whose cubes it ranges over (usually one grid,
// or all_shifted_grids for the doubling constant). Ties keep the first cube.

/// [w]_{A_p}; p = 1 uses <w>_Q / min_Q w.
ConstantReport ap_constant(const Weight& w, double p, std::span<const Grid> grids);
double ap_at(const Weight& w, double p, const Grid& grid, std::size_t cube);

/// Fujii-Wilson [w]_{A_inf} with the dyadic maximal operator of the same grid.
ConstantReport fujii_wilson(const Weight& w, std::span<const Grid> grids);
/// Oracle: M(w chi_Q) evaluated cell by cell against every cube of the grid.
ConstantReport fujii_wilson_brute(const Weight& w, std::span<const Grid> grids);

/// [w]_{RH_s}, s in [1, inf]; s = 1 is 1 by convention.
ConstantReport rh_constant(const Weight& w, double s, std::span<const Grid> grids);
double rh_at(const Weight& w, double s, const Grid& grid, std::size_t cube);

/// [w]_{A^R_{p,q}} with 1/p - 1/q = alpha/n. The inner supremum over E is
/// attained by a prefix of the cells of Q sorted by w ascending.
ConstantReport ar_pq_constant(const Weight& w, double p, double q, double alpha, std::span<const Grid> grids);
ConstantReport ar_pq_brute(const Weight& w, double p, double q, double alpha, std::span<const Grid> grids);
/// |E| |Q|^{-1+alpha/n} w^q(Q)^{1/q} / w^p(E)^{1/p} for an explicit E.
double ar_pq_objective(const Weight& w, double p, double q, double alpha, const Grid& grid, std::size_t cube,
                       const SubsetWitness& e);

/// [w]'_{A^R_{p,q}} = sup_Q w^q(Q)^{1/q} ||chi_Q w^{-p}||_{L^{p',inf}(w^p)} |Q|^{alpha/n - 1}.
ConstantReport ar_pq_prime(const Weight& w, double p, double q, double alpha, std::span<const Grid> grids);
double ar_pq_prime_at(const Weight& w, double p, double q, double alpha, const Grid& grid, std::size_t cube);

/// D^eta_w = sup { w(Q)/w(E) : E in Q, |E| >= eta |Q| }, eta in (0, 1].
ConstantReport doubling_constant(const Weight& w, double eta, std::span<const Grid> grids);
ConstantReport doubling_brute(const Weight& w, double eta, std::span<const Grid> grids);
double doubling_ratio(const Weight& w, const Grid& grid, std::size_t cube, const SubsetWitness& e);

/// Re-evaluates a report's witness with the direct formula of the named constant.
/// Parameters follow the constant: (p) for A_p, (s) for RH, (p, q, alpha) for A^R.
double reevaluate_witness(const ConstantReport& r, const Weight& w, std::span<const Grid> grids,
                          std::span<const double> params);

/// Self-improvement probe for reverse Hoelder weights: for each c, the exponent
/// v = s + (s-1)/(c s [w]_{RH_s}^s) and the ratio [w]_{RH_v}/[w]_{RH_s}.
struct SelfImprovementRow {
    double c = 0.0;
    double v = 0.0;
    double rh_s = 0.0;
    double rh_v = 0.0;
    double ratio = 0.0;
};
std::vector<SelfImprovementRow> rh_self_improvement(const Weight& w, double s, std::span<const double> c_values,
                                                    std::span<const Grid> grids);
/// Same probe from A_inf: v = 1 + d/[w]_{A_inf}, ratio = [w]_{RH_v} (to be compared with 2).
std::vector<SelfImprovementRow> ainf_self_improvement(const Weight& w, std::span<const double> d_values,
                                                      std::span<const Grid> grids);

inline std::span<const Grid> one_grid(const Grid& g) { return {&g, 1}; }

}  // namespace sdlab
