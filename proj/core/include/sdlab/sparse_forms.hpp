#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdlab/dyadic_grid.hpp"
#include "sdlab/exponents.hpp"
#include "sdlab/grid_function.hpp"

namespace sdlab {

struct SparseMember {
    DyadicCube cube;
    CellSet e_cells;  // the disjoint portion E_Q
};

/// A collection of cubes of one grid with designated subsets E_Q and sparsity eta.
struct SparseFamily {
    std::shared_ptr<const Grid> grid;
    std::vector<SparseMember> members;
    double eta = 1.0;

    /// min |E_Q| / |Q| over the members (1 for an empty family).
    [[nodiscard]] double measured_eta() const;
};

enum class SparseViolation { None, NotContained, NotDisjoint, TooSmall, ForeignCube };

struct SparseValidation {
    SparseViolation kind = SparseViolation::None;
    std::size_t member = 0;
    std::size_t other = 0;  // second member for NotDisjoint
    std::string message;

    [[nodiscard]] bool ok() const { return kind == SparseViolation::None; }
};

/// Checks E_Q in Q, pairwise disjointness and |E_Q| >= eta |Q|; reports the first violation.
SparseValidation validate(const SparseFamily& family);

/// Stopping-time family: from each selected Q, the maximal subcubes Q' with
/// <f>_{p0,Q'} >= rho <f>_{p0,Q} are selected next; E_Q is Q minus them.
/// eta is measured and recorded. Throws if f vanishes on every top cube.
SparseFamily build_stopping_family(const GridFunction& f, double p0, std::shared_ptr<const Grid> grid, double rho);

/// The chain of cubes containing `cell`, each with E_Q = Q minus the next cube.
SparseFamily chain_family(std::shared_ptr<const Grid> grid, std::size_t cell);

/// sum_Q |Q|^{alpha/n} <f>_Q chi_Q.
GridFunction sparse_operator(const SparseFamily& family, const GridFunction& f, double alpha);

/// sum_j sum_{Q in S_j} <f>_{p0,Q} <g>_{alpha,q0',Q} |Q|.
double bilinear_form(std::span<const SparseFamily> families, const GridFunction& f, const GridFunction& g,
                     const ExponentTuple& e);

/// w * A^alpha_S(w^{-1} f), cellwise.
GridFunction multiplier_eval(const SparseFamily& family, const GridFunction& f, const Weight& w, double alpha);

/// CSV rows "shift,level,index,e_cells" with ':' joining vector entries and
/// ' ' joining E-cells. The first line is a header.
void write_family_csv(std::ostream& os, const SparseFamily& family);
SparseFamily read_family_csv(std::istream& is, std::shared_ptr<const Grid> grid, double eta);

}  // namespace sdlab
