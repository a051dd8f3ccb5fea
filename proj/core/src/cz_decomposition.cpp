#include "sdlab/cz_decomposition.hpp"

#include <stdexcept>

namespace sdlab {

std::vector<double> weighted_averages(const GridFunction& h, const Weight& u, const Grid& grid) {
    if (!(h.lattice() == grid.lattice()) || !(u.lattice() == grid.lattice()))
        throw std::invalid_argument("weighted_averages: lattice mismatch");
    std::vector<double> hu(h.size());
    for (std::size_t i = 0; i < hu.size(); ++i) hu[i] = h[i] * u[i];
    const auto num = cube_sums(grid, hu);
    const auto den = cube_sums(grid, u.values());
    std::vector<double> avg(num.size());
    for (std::size_t id = 0; id < avg.size(); ++id) avg[id] = num[id] / den[id];
    return avg;
}

CZOutcome decompose(const GridFunction& h, const Weight& u, double lambda, const Grid& grid) {
    if (!(lambda > 0.0)) throw std::invalid_argument("decompose requires lambda > 0");
    if (!h.nonnegative()) throw std::invalid_argument("decompose requires h >= 0");
    const auto avg = weighted_averages(h, u, grid);

    for (std::size_t top : grid.tops())
        if (avg[top] > lambda) return RootExceedsThreshold{top, avg[top], lambda};

    // A cube is maximal when it exceeds lambda and no ancestor does; scanning
    // level by level, `covered` marks cubes inside an already selected cube.
    std::vector<char> covered(grid.cube_count(), 0);
    std::vector<std::size_t> maximal;
    for (int k = 0; k <= grid.depth(); ++k) {
        for (std::size_t id = grid.level_begin(k); id < grid.level_end(k); ++id) {
            const auto p = grid.parent(id);
            if (p && covered[*p]) {
                covered[id] = 1;
                continue;
            }
            if (avg[id] > lambda) {
                covered[id] = 1;
                maximal.push_back(id);
            }
        }
    }

    std::vector<double> g(h.values().begin(), h.values().end());
    std::vector<double> b(h.size(), 0.0);
    std::vector<char> in_omega(h.size(), 0);
    for (std::size_t id : maximal) {
        for (std::size_t c : grid.cells(id)) {
            in_omega[c] = 1;
            g[c] = avg[id];
            b[c] = h[c] - avg[id];
        }
    }
    CellSet omega;
    for (std::size_t c = 0; c < in_omega.size(); ++c)
        if (in_omega[c]) omega.push_back(c);

    return CZDecomposition{lambda, std::move(maximal), GridFunction(h.lattice(), std::move(g)),
                           GridFunction(h.lattice(), std::move(b)), std::move(omega)};
}

}  // namespace sdlab
