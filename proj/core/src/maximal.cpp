#include "sdlab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdlab/exponents.hpp"

namespace sdlab {

namespace {

void check(const GridFunction& f, const Weight& u, double alpha, const Grid& grid) {
    if (!(f.lattice() == grid.lattice()) || !(u.lattice() == grid.lattice()))
        throw std::invalid_argument("dyadic_maximal: lattice mismatch");
    if (!(alpha >= 0.0 && alpha < grid.dimension())) throw std::invalid_argument("dyadic_maximal requires 0 <= alpha < n");
}

}  // namespace

GridFunction dyadic_maximal(const GridFunction& f, const Weight& u, double alpha, const Grid& grid) {
    check(f, u, alpha, grid);
    const double m = grid.cell_measure();
    const double expo = 1.0 - alpha / grid.dimension();
    std::vector<double> fu(f.size());
    for (std::size_t i = 0; i < fu.size(); ++i) fu[i] = std::abs(f[i]) * u[i];
    const auto num = cube_sums(grid, fu);
    const auto den = cube_sums(grid, u.values());

    std::vector<double> avg(grid.cube_count());
    for (std::size_t id = 0; id < avg.size(); ++id) avg[id] = num[id] * m / std::pow(den[id] * m, expo);
    // a single cell averages to |f| exactly; skip the rounding of f u / u
    if (alpha == 0.0)
        for (std::size_t c = 0; c < f.size(); ++c) avg[grid.leaf(c)] = std::abs(f[c]);

    // top-down sweep carrying the running max from each top cube to its leaves
    std::vector<double> run(grid.cube_count(), 0.0);
    for (int k = 0; k <= grid.depth(); ++k) {
        for (std::size_t id = grid.level_begin(k); id < grid.level_end(k); ++id) {
            const auto p = grid.parent(id);
            run[id] = p ? std::max(run[*p], avg[id]) : avg[id];
        }
    }
    std::vector<double> out(f.size());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = run[grid.leaf(c)];
    return {f.lattice(), std::move(out)};
}

GridFunction dyadic_maximal_brute(const GridFunction& f, const Weight& u, double alpha, const Grid& grid) {
    check(f, u, alpha, grid);
    const double m = grid.cell_measure();
    const double expo = 1.0 - alpha / grid.dimension();
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t id = 0; id < grid.cube_count(); ++id) {
        double num = 0.0, den = 0.0;
        for (std::size_t c : grid.cells(id)) {
            num += std::abs(f[c]) * u[c];
            den += u[c];
        }
        const auto cells = grid.cells(id);
        const double v = alpha == 0.0 && cells.size() == 1 ? std::abs(f[cells[0]]) : num * m / std::pow(den * m, expo);
        for (std::size_t c : grid.cells(id)) out[c] = std::max(out[c], v);
    }
    return {f.lattice(), std::move(out)};
}

double maximal_strong_constant(double p, double q, double alpha, int n) {
    if (!(p > 1.0)) throw std::invalid_argument("strong maximal bound requires p > 1");
    if (alpha > 0.0 && !(p <= n / alpha)) throw std::invalid_argument("strong maximal bound requires p <= n/alpha");
    if (std::abs(1.0 / p - 1.0 / q - alpha / n) > kExponentTolerance)
        throw std::invalid_argument("strong maximal bound requires 1/p - 1/q = alpha/n");
    return std::pow(1.0 + conjugate(p) / q, 1.0 - alpha / n);
}

}  // namespace sdlab
