#pragma once

// Exhaustive oracles shared by the unit tests and the acceptance run. They
// enumerate every whole-cell subset, so keep cubes at 12 cells or fewer.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sdlab/grid_function.hpp"

namespace oracle {

using sdlab::Grid;
using sdlab::Weight;

inline std::vector<std::size_t> subset(std::span<const std::size_t> cells, unsigned mask) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (mask >> i & 1u) out.push_back(cells[i]);
    return out;
}

inline double mass(const Weight& w, std::span<const std::size_t> cells) {
    double s = 0.0;
    for (std::size_t c : cells) s += w[c];
    return s;
}

// sup_E |E| |Q|^{-1+alpha/n} w^q(Q)^{1/q} / w^p(E)^{1/p} over whole-cell subsets, in cell units.
inline double ar_oracle(const Weight& w, double p, double q, double alpha, const Grid& g) {
    const double h = w.lattice().cell_measure();
    double best = 0.0;
    for (std::size_t id = 0; id < g.cube_count(); ++id) {
        const auto cells = g.cells(id);
        const double wq = std::pow(w.pow(q).measure(cells), 1.0 / q);
        for (unsigned m = 1; m < (1u << cells.size()); ++m) {
            const auto e = subset(cells, m);
            const double v = e.size() * h * std::pow(g.measure(id), -1.0 + alpha / g.dimension()) * wq /
                             std::pow(w.pow(p).measure(e), 1.0 / p);
            best = std::max(best, v);
        }
    }
    return best;
}

// sup w(Q)/w(E), |E| >= eta |Q|: whole subsets plus one fractional cell topping E up to eta |Q| exactly.
inline double doubling_oracle(const Weight& w, double eta, const Grid& g) {
    double best = 1.0;
    for (std::size_t id = 0; id < g.cube_count(); ++id) {
        const auto cells = g.cells(id);
        const double need = eta * static_cast<double>(cells.size());
        const double total = mass(w, cells);
        for (unsigned m = 0; m < (1u << cells.size()); ++m) {
            const auto e = subset(cells, m);
            const double have = static_cast<double>(e.size());
            if (have >= need) {
                best = std::max(best, total / mass(w, e));
                continue;
            }
            if (need - have > 1.0) continue;
            for (std::size_t c : cells) {
                if (m >> (std::find(cells.begin(), cells.end(), c) - cells.begin()) & 1u) continue;
                best = std::max(best, total / (mass(w, e) + (need - have) * w[c]));
            }
        }
    }
    return best;
}

// [w]'_{A^R_{p,q}} level by level: the weak norm of w^{-p} on Q is a max over the
// thresholds y = w(c)^{-p}, each taken with the cells where w <= w(c).
inline double ar_prime_oracle(const Weight& w, double p, double q, double alpha, const Grid& g) {
    const double h = w.lattice().cell_measure();
    double best = 0.0;
    for (std::size_t id = 0; id < g.cube_count(); ++id) {
        const auto cells = g.cells(id);
        double wq = 0.0;
        for (std::size_t c : cells) wq += std::pow(w[c], q) * h;
        double weak = 0.0;
        for (std::size_t c : cells) {
            double wp = 0.0;
            for (std::size_t d : cells)
                if (w[d] <= w[c]) wp += std::pow(w[d], p) * h;
            const double y = std::pow(w[c], -p);
            weak = std::max(weak, p == 1.0 ? y : y * std::pow(wp, 1.0 - 1.0 / p));
        }
        best = std::max(best, std::pow(wq, 1.0 / q) * weak * std::pow(g.measure(id), alpha / g.dimension() - 1.0));
    }
    return best;
}

}  // namespace oracle
