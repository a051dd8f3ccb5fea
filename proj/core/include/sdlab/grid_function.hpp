#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdlab/dyadic_grid.hpp"

namespace sdlab {

/// Sorted list of finest-cell indices.
using CellSet = std::vector<std::size_t>;

/// Real function that is constant on each finest cell of a lattice.
class GridFunction {
public:
    GridFunction(CellLattice lattice, std::vector<double> values);

    static GridFunction constant(CellLattice lattice, double c);
    static GridFunction indicator(CellLattice lattice, std::span<const std::size_t> cells);

    [[nodiscard]] const CellLattice& lattice() const { return lattice_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t cell) const { return values_[cell]; }

    /// Cellwise image under fn; the result must stay finite.
    [[nodiscard]] GridFunction map(const std::function<double(double)>& fn) const;
    [[nodiscard]] GridFunction abs_pow(double r) const;
    [[nodiscard]] double max_abs() const;
    [[nodiscard]] bool nonnegative() const;

    friend bool operator==(const GridFunction&, const GridFunction&) = default;

private:
    CellLattice lattice_;
    std::vector<double> values_;
};

GridFunction operator*(const GridFunction& f, const GridFunction& g);
GridFunction operator+(const GridFunction& f, const GridFunction& g);
GridFunction operator-(const GridFunction& f, const GridFunction& g);
GridFunction operator*(double c, const GridFunction& f);

/// Strictly positive grid function, also used as the measure u(E) = int_E u dx.
class Weight {
public:
    explicit Weight(GridFunction f);

    static Weight lebesgue(CellLattice lattice) { return Weight(GridFunction::constant(lattice, 1.0)); }

    [[nodiscard]] const GridFunction& function() const { return f_; }
    [[nodiscard]] std::span<const double> values() const { return f_.values(); }
    [[nodiscard]] const CellLattice& lattice() const { return f_.lattice(); }
    [[nodiscard]] double operator[](std::size_t cell) const { return f_[cell]; }

    /// Cellwise power w^t, which is again a weight.
    [[nodiscard]] Weight pow(double t) const;
    [[nodiscard]] double measure(std::span<const std::size_t> cells) const;
    [[nodiscard]] double total() const;

private:
    GridFunction f_;
};

/// Sum of `values` over the cells of every cube of `grid`, indexed by cube id,
/// accumulated bottom-up through the tree.
std::vector<double> cube_sums(const Grid& grid, std::span<const double> values);

// ---------------------------------------------------------------------------
// Synthesis

struct ConstantSpec {
    double c = 1.0;
};
struct IndicatorSpec {
    CellSet cells;
};
/// |x - center|^a sampled at cell midpoints (center defaults to the origin).
struct PowerSpec {
    double a = 0.0;
    std::vector<double> center;
};
enum class RandomKind { Uniform, LogNormal };
struct RandomSpec {
    std::uint64_t seed = 0;
    RandomKind kind = RandomKind::LogNormal;
    double lo = 0.0;     // uniform
    double hi = 1.0;     // uniform
    double sigma = 1.0;  // log-normal
};

GridFunction synthesize(const ConstantSpec& spec, CellLattice lattice);
GridFunction synthesize(const IndicatorSpec& spec, CellLattice lattice);
GridFunction synthesize(const PowerSpec& spec, CellLattice lattice);
GridFunction synthesize(const RandomSpec& spec, CellLattice lattice);

/// Midpoint of a finest cell in [0,1)^n.
std::vector<double> cell_midpoint(CellLattice lattice, std::size_t cell);

// ---------------------------------------------------------------------------
// Integrals and averages

/// (|Q|^{-1+alpha/n} int_Q |f|^r dx)^{1/r}; r = inf gives max_Q |f| (alpha must be 0).
double local_average(const GridFunction& f, double alpha, double r, const Grid& grid, std::size_t cube);
double local_average(const GridFunction& f, double alpha, double r, const Grid& grid, const DyadicCube& q);

/// <f, g> = int f g dx.
double pairing(const GridFunction& f, const GridFunction& g);

/// u({|f| > y}).
double distribution(const GridFunction& f, const Weight& u, double y);

struct LorentzNorms {
    double lr = 0.0;       // L^r(u)
    double lr1 = 0.0;      // L^{r,1}(u), normalized as r int_0^inf lambda^{1/r} dy
    double lr_weak = 0.0;  // L^{r,inf}(u)
};

/// Closed-form Lorentz norms of a step function; 1 <= r < inf.
LorentzNorms lorentz_norms(const GridFunction& f, const Weight& u, double r);
/// L^{r,1} through the rearrangement form int_0^inf f*(t) t^{1/r} dt/t.
double lorentz_r1_rearrangement(const GridFunction& f, const Weight& u, double r);
/// Weak norm restricted to a set of cells (f is treated as zero elsewhere); r may be inf.
double weak_norm_on(const GridFunction& f, const Weight& u, double r, std::span<const std::size_t> cells);

/// Decreasing rearrangement as steps: value v_j holds on [M_{j-1}, M_j).
struct RearrangementStep {
    double value = 0.0;
    double mass_end = 0.0;
};
std::vector<RearrangementStep> decreasing_rearrangement(const GridFunction& f, const Weight& u);

// ---------------------------------------------------------------------------
// Weak-norm dual characterization

struct WeakDualEstimate {
    double value = 0.0;
    std::optional<std::size_t> best_candidate;
    std::size_t skipped = 0;  // candidates with zero w^q mass
};

/// Inner infimum for one candidate G: min over G' in G with w^q(G') >= w^q(G)/2
/// of w^q(G')^{-1+1/q} <h, chi_{G'} w^q>, filling the lightest h-cells first.
double weak_dual_inner(const GridFunction& h, const Weight& wq, double q, std::span<const std::size_t> g_cells);
/// Exhaustive oracle for weak_dual_inner over whole-cell subsets plus one fractional cell.
double weak_dual_inner_brute(const GridFunction& h, const Weight& wq, double q, std::span<const std::size_t> g_cells);

/// max over candidates G of weak_dual_inner; `w` is the weight whose q-th power is the measure.
WeakDualEstimate weak_dual_estimate(const GridFunction& h, const Weight& w, double q,
                                    std::span<const CellSet> candidates);
/// All level sets {h > y}, y >= 0, plus the whole domain.
std::vector<CellSet> level_set_candidates(const GridFunction& h);

// ---------------------------------------------------------------------------
// CSV

/// Writes "cell,value" rows with 17 significant digits.
void write_csv(std::ostream& os, const GridFunction& f);

}  // namespace sdlab
