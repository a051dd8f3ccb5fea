#pragma once

#include "sdlab/dyadic_grid.hpp"
#include "sdlab/grid_function.hpp"

namespace sdlab {

/// Dyadic fractional maximal operator with respect to the measure u:
///   M_{alpha,u} f(x) = sup_{Q in grid, x in Q} u(Q)^{-(1-alpha/n)} int_Q |f| du.
/// One bottom-up pass for the cube integrals, then a top-down sweep carrying the running max.
GridFunction dyadic_maximal(const GridFunction& f, const Weight& u, double alpha, const Grid& grid);

/// Oracle: for every cell, enumerate every cube of the grid containing it.
GridFunction dyadic_maximal_brute(const GridFunction& f, const Weight& u, double alpha, const Grid& grid);

/// Constant (1 + p'/q)^{1-alpha/n} of the strong bound L^p(u) -> L^q(u),
/// 1 < p <= n/alpha, 1/p - 1/q = alpha/n.
double maximal_strong_constant(double p, double q, double alpha, int n);

}  // namespace sdlab
