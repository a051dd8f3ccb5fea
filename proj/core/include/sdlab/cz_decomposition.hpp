#pragma once

#include <variant>
#include <vector>

#include "sdlab/dyadic_grid.hpp"
#include "sdlab/grid_function.hpp"

namespace sdlab {

/// h = g + b at level lambda with respect to the measure u.
struct CZDecomposition {
    double lambda = 0.0;
    /// Maximal cubes P with u(P)^{-1} int_P h du > lambda, as grid ids in (level, index) order.
    std::vector<std::size_t> maximal;
    GridFunction good;
    GridFunction bad;
    /// Omega, the union of the maximal cubes.
    CellSet omega;
};

/// Returned instead of a decomposition when a top cube of the grid already
/// exceeds the threshold (the top-level average is above lambda).
struct RootExceedsThreshold {
    std::size_t cube = 0;
    double average = 0.0;
    double lambda = 0.0;
};

using CZOutcome = std::variant<CZDecomposition, RootExceedsThreshold>;

/// Weighted dyadic Calderon-Zygmund decomposition of h >= 0 at height lambda > 0.
CZOutcome decompose(const GridFunction& h, const Weight& u, double lambda, const Grid& grid);

/// u-average of h over every cube of the grid, indexed by cube id.
std::vector<double> weighted_averages(const GridFunction& h, const Weight& u, const Grid& grid);

}  // namespace sdlab
