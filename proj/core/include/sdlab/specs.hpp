#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sdlab/dyadic_grid.hpp"
#include "sdlab/grid_function.hpp"

namespace sdlab {

/// Decimal or "a/b" rational; the whole string must be consumed. "inf" is accepted.
double parse_number(std::string_view text);

/// "n=<n>,L=<L>[,a=<a1>:<a2>...]"
GridSpec parse_grid_spec(std::string_view text);

/// Function mini-language:
///   const:<c>
///   indicator:cells=<i>-<j>|<k>...
///   power:a=<a>[,center=<x1>:<x2>...]
///   random:seed=<s>[,dist=lognormal|uniform][,sigma=<s>][,lo=<lo>,hi=<hi>]
GridFunction parse_function_spec(std::string_view text, CellLattice lattice);

/// One member of a parameterized weight family.
struct FamilyMember {
    std::string spec;  // a function spec accepted by parse_function_spec
    double parameter = 0.0;
};

/// "power:a=<lo>..<hi>:<count>[,center=...]" expands to `count` evenly spaced power weights.
std::vector<FamilyMember> parse_family_spec(std::string_view text);

/// Shortest decimal that round-trips (17 significant digits at most).
std::string format_number(double x);

}  // namespace sdlab
