#include "sdlab/weight_constants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "sdlab/exponents.hpp"

namespace sdlab {

namespace {

constexpr std::size_t kBruteCellLimit = 16;
constexpr double kFractionLadder[] = {0.125, 0.25, 0.5, 0.75, 0.875};

void require_grids(std::span<const Grid> grids, const Weight& w) {
    if (grids.empty()) throw std::invalid_argument("at least one grid is required");
    for (const Grid& g : grids)
        if (!(g.lattice() == w.lattice())) throw std::invalid_argument("weight and grid lattices differ");
}

void check_rpq(double p, double q, double alpha, int n) {
    if (!(p >= 1.0 && p <= q && std::isfinite(q))) throw std::invalid_argument("A^R_{p,q} requires 1 <= p <= q < inf");
    if (!(alpha >= 0.0 && alpha < n)) throw std::invalid_argument("A^R_{p,q} requires 0 <= alpha < n");
    if (std::abs(1.0 / p - 1.0 / q - alpha / n) > kExponentTolerance)
        throw std::invalid_argument("A^R_{p,q} requires 1/p - 1/q = alpha/n");
}

const Grid& grid_of(std::span<const Grid> grids, const DyadicCube& q) {
    for (const Grid& g : grids)
        if (g.spec().shift == q.shift) return g;
    throw ShiftMismatchError("no grid with the witness cube's shift");
}

// Running maximum over (grid, cube) pairs with first-wins tie breaking.
struct Best {
    double value = -kInfinity;
    std::optional<DyadicCube> cube;
    std::optional<SubsetWitness> subset;

    void offer(double v, const Grid& g, std::size_t id, std::optional<SubsetWitness> e = std::nullopt) {
        if (v > value) {
            value = v;
            cube = g.cube(id);
            subset = std::move(e);
        }
    }
    ConstantReport report(std::string name, Algorithm a, int depth) const {
        return {std::move(name), value, cube, subset, a, depth};
    }
};

std::vector<std::size_t> sorted_by_value(std::span<const std::size_t> cells, std::span<const double> v) {
    std::vector<std::size_t> order(cells.begin(), cells.end());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return order;
}

double fujii_wilson_at(const Weight& w, const Grid& grid, std::size_t cube) {
    // sup over R in the subtree of Q of the average of w, per cell of Q
    const auto cells = grid.cells(cube);
    double integral = 0.0;
    double mass = 0.0;
    for (std::size_t c : cells) {
        double best = 0.0;
        std::optional<std::size_t> r = grid.leaf(c);
        while (r) {
            double s = 0.0;
            for (std::size_t x : grid.cells(*r)) s += w[x];
            best = std::max(best, s / static_cast<double>(grid.cells_in(*r)));
            if (*r == cube) break;
            r = grid.parent(*r);
        }
        integral += best;
        mass += w[c];
    }
    return integral / mass;
}

template <typename Visit>
void for_each_subset(std::span<const std::size_t> cells, Visit&& visit) {
    const std::size_t k = cells.size();
    if (k > kBruteCellLimit) throw std::invalid_argument("brute-force oracle limited to cubes of at most 16 cells");
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
        SubsetWitness e;
        for (std::size_t i = 0; i < k; ++i)
            if (mask >> i & 1) e.cells.push_back(cells[i]);
        visit(e);
    }
}

}  // namespace

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Direct: return "direct";
        case Algorithm::Greedy: return "greedy";
        case Algorithm::Brute: return "brute";
    }
    return "?";
}

// ---------------------------------------------------------------------------

double ap_at(const Weight& w, double p, const Grid& grid, std::size_t cube) {
    const auto cells = grid.cells(cube);
    const double count = static_cast<double>(cells.size());
    double sw = 0.0;
    for (std::size_t c : cells) sw += w[c];
    if (p == 1.0) {
        double mn = kInfinity;
        for (std::size_t c : cells) mn = std::min(mn, w[c]);
        return (sw / count) / mn;
    }
    const double e = 1.0 - conjugate(p);
    double sd = 0.0;
    for (std::size_t c : cells) sd += std::pow(w[c], e);
    return (sw / count) * std::pow(sd / count, p - 1.0);
}

ConstantReport ap_constant(const Weight& w, double p, std::span<const Grid> grids) {
    require_grids(grids, w);
    if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("A_p requires 1 <= p < inf");
    Best best;
    for (const Grid& g : grids) {
        const auto sw = cube_sums(g, w.values());
        if (p == 1.0) {
            std::vector<double> mn(g.cube_count(), kInfinity);
            for (std::size_t c = 0; c < g.cell_count(); ++c) mn[g.leaf(c)] = w[c];
            for (int k = g.depth() - 1; k >= 0; --k)
                for (std::size_t id = g.level_begin(k); id < g.level_end(k); ++id)
                    for (std::size_t ch : g.children(id)) mn[id] = std::min(mn[id], mn[ch]);
            for (std::size_t id = 0; id < g.cube_count(); ++id)
                best.offer(sw[id] / static_cast<double>(g.cells_in(id)) / mn[id], g, id);
        } else {
            const Weight dual = w.pow(1.0 - conjugate(p));
            const auto sd = cube_sums(g, dual.values());
            for (std::size_t id = 0; id < g.cube_count(); ++id) {
                const double cnt = static_cast<double>(g.cells_in(id));
                best.offer((sw[id] / cnt) * std::pow(sd[id] / cnt, p - 1.0), g, id);
            }
        }
    }
    return best.report("A_p", Algorithm::Direct, grids.front().depth());
}

// ---------------------------------------------------------------------------

ConstantReport fujii_wilson(const Weight& w, std::span<const Grid> grids) {
    require_grids(grids, w);
    Best best;
    for (const Grid& g : grids) {
        const auto sw = cube_sums(g, w.values());
        std::vector<double> acc(g.cube_count(), 0.0);
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            double running = 0.0;
            std::optional<std::size_t> r = g.leaf(c);
            while (r) {
                running = std::max(running, sw[*r] / static_cast<double>(g.cells_in(*r)));
                acc[*r] += running;
                r = g.parent(*r);
            }
        }
        for (std::size_t id = 0; id < g.cube_count(); ++id) best.offer(acc[id] / sw[id], g, id);
    }
    return best.report("A_inf", Algorithm::Direct, grids.front().depth());
}

ConstantReport fujii_wilson_brute(const Weight& w, std::span<const Grid> grids) {
    require_grids(grids, w);
    Best best;
    for (const Grid& g : grids) {
        for (std::size_t q = 0; q < g.cube_count(); ++q) {
            std::vector<char> in_q(g.cell_count(), 0);
            for (std::size_t c : g.cells(q)) in_q[c] = 1;
            double integral = 0.0, mass = 0.0;
            for (std::size_t x : g.cells(q)) {
                double mx = 0.0;
                for (std::size_t r = 0; r < g.cube_count(); ++r) {
                    const auto rc = g.cells(r);
                    if (!std::binary_search(rc.begin(), rc.end(), x)) continue;
                    double s = 0.0;
                    for (std::size_t c : rc)
                        if (in_q[c]) s += w[c];
                    mx = std::max(mx, s / static_cast<double>(rc.size()));
                }
                integral += mx;
                mass += w[x];
            }
            best.offer(integral / mass, g, q);
        }
    }
    return best.report("A_inf", Algorithm::Brute, grids.front().depth());
}

// ---------------------------------------------------------------------------

double rh_at(const Weight& w, double s, const Grid& grid, std::size_t cube) {
    if (s == 1.0) return 1.0;
    const auto cells = grid.cells(cube);
    const double count = static_cast<double>(cells.size());
    double sw = 0.0, top = 0.0, ss = 0.0;
    for (std::size_t c : cells) {
        sw += w[c];
        top = std::max(top, w[c]);
        if (!std::isinf(s)) ss += std::pow(w[c], s);
    }
    const double avg = sw / count;
    if (std::isinf(s)) return top / avg;
    return std::pow(ss / count, 1.0 / s) / avg;
}

ConstantReport rh_constant(const Weight& w, double s, std::span<const Grid> grids) {
    require_grids(grids, w);
    if (!(s >= 1.0)) throw std::invalid_argument("RH_s requires s >= 1");
    if (s == 1.0) return {"RH_s", 1.0, std::nullopt, std::nullopt, Algorithm::Direct, grids.front().depth()};
    Best best;
    for (const Grid& g : grids) {
        const auto sw = cube_sums(g, w.values());
        if (std::isinf(s)) {
            std::vector<double> mx(g.cube_count(), 0.0);
            for (std::size_t c = 0; c < g.cell_count(); ++c) mx[g.leaf(c)] = w[c];
            for (int k = g.depth() - 1; k >= 0; --k)
                for (std::size_t id = g.level_begin(k); id < g.level_end(k); ++id)
                    for (std::size_t ch : g.children(id)) mx[id] = std::max(mx[id], mx[ch]);
            for (std::size_t id = 0; id < g.cube_count(); ++id)
                best.offer(mx[id] / (sw[id] / static_cast<double>(g.cells_in(id))), g, id);
        } else {
            const auto ss = cube_sums(g, w.pow(s).values());
            for (std::size_t id = 0; id < g.cube_count(); ++id) {
                const double cnt = static_cast<double>(g.cells_in(id));
                best.offer(std::pow(ss[id] / cnt, 1.0 / s) / (sw[id] / cnt), g, id);
            }
        }
    }
    return best.report("RH_s", Algorithm::Direct, grids.front().depth());
}

// ---------------------------------------------------------------------------

double ar_pq_objective(const Weight& w, double p, double q, double alpha, const Grid& grid, std::size_t cube,
                       const SubsetWitness& e) {
    check_rpq(p, q, alpha, grid.dimension());
    const double m = grid.cell_measure();
    double wp_e = 0.0;
    for (std::size_t c : e.cells) wp_e += std::pow(w[c], p);
    if (e.partial_cell) wp_e += e.partial_fraction * std::pow(w[*e.partial_cell], p);
    double wq_q = 0.0;
    for (std::size_t c : grid.cells(cube)) wq_q += std::pow(w[c], q);
    const double e_measure = e.cell_volume() * m;
    return e_measure * std::pow(grid.measure(cube), -1.0 + alpha / grid.dimension()) *
           std::pow(wq_q * m, 1.0 / q) / std::pow(wp_e * m, 1.0 / p);
}

ConstantReport ar_pq_constant(const Weight& w, double p, double q, double alpha, std::span<const Grid> grids) {
    require_grids(grids, w);
    check_rpq(p, q, alpha, grids.front().dimension());
    const Weight wp = w.pow(p);
    const Weight wq = w.pow(q);
    Best best;
    for (const Grid& g : grids) {
        const double m = g.cell_measure();
        const double n = g.dimension();
        const auto sq = cube_sums(g, wq.values());
        for (std::size_t id = 0; id < g.cube_count(); ++id) {
            const auto order = sorted_by_value(g.cells(id), wp.values());
            double mass = 0.0;
            double ratio = -kInfinity;
            std::size_t take = 0;
            for (std::size_t k = 0; k < order.size(); ++k) {
                mass += wp[order[k]];
                const double r = static_cast<double>(k + 1) * m / std::pow(mass * m, 1.0 / p);
                if (r > ratio) {
                    ratio = r;
                    take = k + 1;
                }
            }
            const double v = std::pow(g.measure(id), -1.0 + alpha / n) * std::pow(sq[id] * m, 1.0 / q) * ratio;
            if (v > best.value) {
                SubsetWitness e;
                e.cells.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
                std::sort(e.cells.begin(), e.cells.end());
                best.offer(v, g, id, std::move(e));
            }
        }
    }
    return best.report("A^R_pq", Algorithm::Greedy, grids.front().depth());
}

ConstantReport ar_pq_brute(const Weight& w, double p, double q, double alpha, std::span<const Grid> grids) {
    require_grids(grids, w);
    check_rpq(p, q, alpha, grids.front().dimension());
    Best best;
    for (const Grid& g : grids) {
        for (std::size_t id = 0; id < g.cube_count(); ++id) {
            const auto cells = g.cells(id);
            for_each_subset(cells, [&](const SubsetWitness& e) {
                best.offer(ar_pq_objective(w, p, q, alpha, g, id, e), g, id, e);
                for (std::size_t c : cells) {
                    if (std::binary_search(e.cells.begin(), e.cells.end(), c)) continue;
                    for (double f : kFractionLadder) {
                        SubsetWitness ef = e;
                        ef.partial_cell = c;
                        ef.partial_fraction = f;
                        best.offer(ar_pq_objective(w, p, q, alpha, g, id, ef), g, id, ef);
                    }
                }
            });
        }
    }
    return best.report("A^R_pq", Algorithm::Brute, grids.front().depth());
}

double ar_pq_prime_at(const Weight& w, double p, double q, double alpha, const Grid& grid, std::size_t cube) {
    check_rpq(p, q, alpha, grid.dimension());
    const auto cells = grid.cells(cube);
    double wq_q = 0.0;
    for (std::size_t c : cells) wq_q += std::pow(w[c], q);
    // 1/q + 1/p' + alpha/n - 1 = 0, so every power of |Q| cancels against averages:
    // <w^q>_Q^{1/q} times the weak norm taken in the measure w^p dx / |Q|.
    const double inv_q = 1.0 / grid.measure(cube);
    const GridFunction inv = w.function().map([p](double x) { return std::pow(x, -p); });
    const Weight scaled(w.function().map([p, inv_q](double x) { return std::pow(x, p) * inv_q; }));
    const double weak = weak_norm_on(inv, scaled, conjugate(p), cells);
    return std::pow(wq_q / static_cast<double>(cells.size()), 1.0 / q) * weak;
}

ConstantReport ar_pq_prime(const Weight& w, double p, double q, double alpha, std::span<const Grid> grids) {
    require_grids(grids, w);
    check_rpq(p, q, alpha, grids.front().dimension());
    Best best;
    for (const Grid& g : grids)
        for (std::size_t id = 0; id < g.cube_count(); ++id) best.offer(ar_pq_prime_at(w, p, q, alpha, g, id), g, id);
    return best.report("A^R_pq'", Algorithm::Direct, grids.front().depth());
}

// ---------------------------------------------------------------------------

double doubling_ratio(const Weight& w, const Grid& grid, std::size_t cube, const SubsetWitness& e) {
    double wq = 0.0;
    for (std::size_t c : grid.cells(cube)) wq += w[c];
    double we = 0.0;
    for (std::size_t c : e.cells) we += w[c];
    if (e.partial_cell) we += e.partial_fraction * w[*e.partial_cell];
    return wq / we;
}

ConstantReport doubling_constant(const Weight& w, double eta, std::span<const Grid> grids) {
    require_grids(grids, w);
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("doubling constant requires eta in (0, 1]");
    Best best;
    for (const Grid& g : grids) {
        const auto sw = cube_sums(g, w.values());
        for (std::size_t id = 0; id < g.cube_count(); ++id) {
            const auto order = sorted_by_value(g.cells(id), w.values());
            const double need = eta * static_cast<double>(order.size());
            auto whole = static_cast<std::size_t>(std::floor(need));
            double frac = need - static_cast<double>(whole);
            if (whole == order.size()) frac = 0.0;
            double we = 0.0;
            for (std::size_t k = 0; k < whole; ++k) we += w[order[k]];
            if (frac > 0.0) we += frac * w[order[whole]];
            const double v = sw[id] / we;
            if (v > best.value) {
                SubsetWitness e;
                e.cells.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(whole));
                std::sort(e.cells.begin(), e.cells.end());
                if (frac > 0.0) {
                    e.partial_cell = order[whole];
                    e.partial_fraction = frac;
                }
                best.offer(v, g, id, std::move(e));
            }
        }
    }
    return best.report("D^eta", Algorithm::Greedy, grids.front().depth());
}

ConstantReport doubling_brute(const Weight& w, double eta, std::span<const Grid> grids) {
    require_grids(grids, w);
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("doubling constant requires eta in (0, 1]");
    Best best;
    for (const Grid& g : grids) {
        for (std::size_t id = 0; id < g.cube_count(); ++id) {
            const auto cells = g.cells(id);
            const double need = eta * static_cast<double>(cells.size());
            for_each_subset(cells, [&](const SubsetWitness& e) {
                const auto have = static_cast<double>(e.cells.size());
                if (have >= need) {
                    best.offer(doubling_ratio(w, g, id, e), g, id, e);
                    return;
                }
                if (have + 1.0 < need) return;
                for (std::size_t c : cells) {
                    if (std::binary_search(e.cells.begin(), e.cells.end(), c)) continue;
                    SubsetWitness ef = e;
                    ef.partial_cell = c;
                    ef.partial_fraction = need - have;
                    best.offer(doubling_ratio(w, g, id, ef), g, id, ef);
                }
            });
            // E = partial cell alone, when eta |Q| is less than one cell
            if (need < 1.0)
                for (std::size_t c : cells) {
                    SubsetWitness ef;
                    ef.partial_cell = c;
                    ef.partial_fraction = need;
                    best.offer(doubling_ratio(w, g, id, ef), g, id, ef);
                }
        }
    }
    return best.report("D^eta", Algorithm::Brute, grids.front().depth());
}

// ---------------------------------------------------------------------------

double reevaluate_witness(const ConstantReport& r, const Weight& w, std::span<const Grid> grids,
                          std::span<const double> params) {
    if (!r.cube) {
        if (r.name == "RH_s") return 1.0;
        throw std::invalid_argument("report carries no witness cube");
    }
    const Grid& g = grid_of(grids, *r.cube);
    const std::size_t id = g.id(*r.cube);
    auto param = [&](std::size_t i) {
        if (i >= params.size()) throw std::invalid_argument("missing parameter for witness re-evaluation");
        return params[i];
    };
    if (r.name == "A_p") return ap_at(w, param(0), g, id);
    if (r.name == "A_inf") return fujii_wilson_at(w, g, id);
    if (r.name == "RH_s") return rh_at(w, param(0), g, id);
    if (r.name == "A^R_pq") return ar_pq_objective(w, param(0), param(1), param(2), g, id, r.subset.value());
    if (r.name == "A^R_pq'") return ar_pq_prime_at(w, param(0), param(1), param(2), g, id);
    if (r.name == "D^eta") return doubling_ratio(w, g, id, r.subset.value());
    throw std::invalid_argument("unknown constant name: " + r.name);
}

std::vector<SelfImprovementRow> rh_self_improvement(const Weight& w, double s, std::span<const double> c_values,
                                                    std::span<const Grid> grids) {
    if (!(s > 1.0) || std::isinf(s)) throw std::invalid_argument("self-improvement probe requires 1 < s < inf");
    const double rh_s = rh_constant(w, s, grids).value;
    std::vector<SelfImprovementRow> rows;
    for (double c : c_values) {
        if (!(c > 0.0)) throw std::invalid_argument("self-improvement constant must be positive");
        const double v = s + (s - 1.0) / (c * s * std::pow(rh_s, s));
        const double rh_v = rh_constant(w, v, grids).value;
        rows.push_back({c, v, rh_s, rh_v, rh_v / rh_s});
    }
    return rows;
}

std::vector<SelfImprovementRow> ainf_self_improvement(const Weight& w, std::span<const double> d_values,
                                                      std::span<const Grid> grids) {
    const double ainf = fujii_wilson(w, grids).value;
    std::vector<SelfImprovementRow> rows;
    for (double d : d_values) {
        if (!(d > 0.0)) throw std::invalid_argument("self-improvement constant must be positive");
        const double v = 1.0 + d / ainf;
        const double rh_v = rh_constant(w, v, grids).value;
        rows.push_back({d, v, ainf, rh_v, rh_v});
    }
    return rows;
}

}  // namespace sdlab
