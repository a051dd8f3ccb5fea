#include "sdlab/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "sdlab/exponents.hpp"

namespace sdlab {

namespace {

void require_same_lattice(const CellLattice& a, const CellLattice& b) {
    if (!(a == b)) throw std::invalid_argument("grid functions live on different lattices");
}

struct ValueMass {
    double value;
    double mass;
};

// (|f|, u-mass) pairs of the given cells, sorted by value descending.
std::vector<ValueMass> sorted_desc(const GridFunction& f, const Weight& u, std::span<const std::size_t> cells) {
    const double m = f.lattice().cell_measure();
    std::vector<ValueMass> vm;
    vm.reserve(cells.size());
    for (std::size_t c : cells) vm.push_back({std::abs(f[c]), u[c] * m});
    std::stable_sort(vm.begin(), vm.end(), [](const ValueMass& a, const ValueMass& b) { return a.value > b.value; });
    return vm;
}

std::vector<RearrangementStep> steps_of(const std::vector<ValueMass>& vm) {
    std::vector<RearrangementStep> steps;
    double mass = 0.0;
    for (std::size_t i = 0; i < vm.size();) {
        const double v = vm[i].value;
        if (v == 0.0) break;
        while (i < vm.size() && vm[i].value == v) mass += vm[i++].mass;
        steps.push_back({v, mass});
    }
    return steps;
}

std::vector<std::size_t> all_cells(std::size_t count) {
    std::vector<std::size_t> cells(count);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    return cells;
}

}  // namespace

// ---------------------------------------------------------------------------

GridFunction::GridFunction(CellLattice lattice, std::vector<double> values)
    : lattice_(lattice), values_(std::move(values)) {
    if (values_.size() != lattice_.cell_count())
        throw std::invalid_argument("value array length must equal the number of finest cells");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("grid function values must be finite");
}

GridFunction GridFunction::constant(CellLattice lattice, double c) {
    return {lattice, std::vector<double>(lattice.cell_count(), c)};
}

GridFunction GridFunction::indicator(CellLattice lattice, std::span<const std::size_t> cells) {
    std::vector<double> v(lattice.cell_count(), 0.0);
    for (std::size_t c : cells) v.at(c) = 1.0;
    return {lattice, std::move(v)};
}

GridFunction GridFunction::map(const std::function<double(double)>& fn) const {
    std::vector<double> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), fn);
    return {lattice_, std::move(v)};
}

GridFunction GridFunction::abs_pow(double r) const {
    return map([r](double x) { return std::pow(std::abs(x), r); });
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool GridFunction::nonnegative() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

GridFunction operator*(const GridFunction& f, const GridFunction& g) {
    require_same_lattice(f.lattice(), g.lattice());
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] * g[i];
    return {f.lattice(), std::move(v)};
}

GridFunction operator+(const GridFunction& f, const GridFunction& g) {
    require_same_lattice(f.lattice(), g.lattice());
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] + g[i];
    return {f.lattice(), std::move(v)};
}

GridFunction operator-(const GridFunction& f, const GridFunction& g) {
    require_same_lattice(f.lattice(), g.lattice());
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] - g[i];
    return {f.lattice(), std::move(v)};
}

GridFunction operator*(double c, const GridFunction& f) {
    return f.map([c](double x) { return c * x; });
}

Weight::Weight(GridFunction f) : f_(std::move(f)) {
    for (double v : f_.values())
        if (!(v > 0.0)) throw std::invalid_argument("weight values must be strictly positive");
}

Weight Weight::pow(double t) const {
    return Weight(f_.map([t](double x) { return std::pow(x, t); }));
}

double Weight::measure(std::span<const std::size_t> cells) const {
    double s = 0.0;
    for (std::size_t c : cells) s += f_[c];
    return s * lattice().cell_measure();
}

double Weight::total() const {
    return std::accumulate(f_.values().begin(), f_.values().end(), 0.0) * lattice().cell_measure();
}

std::vector<double> cube_sums(const Grid& grid, std::span<const double> values) {
    if (values.size() != grid.cell_count()) throw std::invalid_argument("cube_sums: value count mismatch");
    std::vector<double> sums(grid.cube_count(), 0.0);
    for (std::size_t c = 0; c < values.size(); ++c) sums[grid.leaf(c)] = values[c];
    for (int k = grid.depth() - 1; k >= 0; --k) {
        for (std::size_t id = grid.level_begin(k); id < grid.level_end(k); ++id) {
            double s = 0.0;
            for (std::size_t ch : grid.children(id)) s += sums[ch];
            sums[id] = s;
        }
    }
    return sums;
}

// ---------------------------------------------------------------------------

std::vector<double> cell_midpoint(CellLattice lattice, std::size_t cell) {
    const std::size_t side = lattice.side_cells();
    const double h = std::ldexp(1.0, -lattice.depth);
    std::vector<double> x(lattice.dimension);
    for (int d = 0; d < lattice.dimension; ++d) {
        x[d] = (static_cast<double>(cell % side) + 0.5) * h;
        cell /= side;
    }
    return x;
}

GridFunction synthesize(const ConstantSpec& spec, CellLattice lattice) {
    return GridFunction::constant(lattice, spec.c);
}

GridFunction synthesize(const IndicatorSpec& spec, CellLattice lattice) {
    for (std::size_t c : spec.cells)
        if (c >= lattice.cell_count()) throw std::invalid_argument("indicator cell index out of range");
    return GridFunction::indicator(lattice, spec.cells);
}

GridFunction synthesize(const PowerSpec& spec, CellLattice lattice) {
    if (!(spec.a > -1.0 / lattice.dimension)) throw std::invalid_argument("power exponent must exceed -1/n");
    std::vector<double> center = spec.center;
    if (center.empty()) center.assign(lattice.dimension, 0.0);
    if (static_cast<int>(center.size()) != lattice.dimension)
        throw std::invalid_argument("power center must have n coordinates");
    std::vector<double> v(lattice.cell_count());
    for (std::size_t c = 0; c < v.size(); ++c) {
        const auto x = cell_midpoint(lattice, c);
        double r2 = 0.0;
        for (int d = 0; d < lattice.dimension; ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
        v[c] = std::pow(std::sqrt(r2), spec.a);
    }
    return {lattice, std::move(v)};
}

GridFunction synthesize(const RandomSpec& spec, CellLattice lattice) {
    std::mt19937_64 rng(spec.seed);
    std::vector<double> v(lattice.cell_count());
    if (spec.kind == RandomKind::Uniform) {
        if (!(spec.lo < spec.hi)) throw std::invalid_argument("uniform range requires lo < hi");
        std::uniform_real_distribution<double> dist(spec.lo, spec.hi);
        for (double& x : v) x = dist(rng);
    } else {
        if (!(spec.sigma >= 0.0)) throw std::invalid_argument("log-normal sigma must be >= 0");
        std::lognormal_distribution<double> dist(0.0, spec.sigma);
        for (double& x : v) x = dist(rng);
    }
    return {lattice, std::move(v)};
}

// ---------------------------------------------------------------------------

double local_average(const GridFunction& f, double alpha, double r, const Grid& grid, std::size_t cube) {
    require_same_lattice(f.lattice(), grid.lattice());
    if (!(r >= 1.0)) throw std::invalid_argument("local_average requires r >= 1");
    if (!(alpha >= 0.0 && alpha < grid.dimension())) throw std::invalid_argument("local_average requires 0 <= alpha < n");
    const auto cells = grid.cells(cube);
    if (std::isinf(r)) {
        if (alpha != 0.0) throw std::invalid_argument("local_average with r = inf requires alpha = 0");
        double m = 0.0;
        for (std::size_t c : cells) m = std::max(m, std::abs(f[c]));
        return m;
    }
    double s = 0.0;
    for (std::size_t c : cells) s += std::pow(std::abs(f[c]), r);
    const double q_measure = grid.measure(cube);
    s *= grid.cell_measure();
    return std::pow(std::pow(q_measure, -1.0 + alpha / grid.dimension()) * s, 1.0 / r);
}

double local_average(const GridFunction& f, double alpha, double r, const Grid& grid, const DyadicCube& q) {
    return local_average(f, alpha, r, grid, grid.id(q));
}

double pairing(const GridFunction& f, const GridFunction& g) {
    require_same_lattice(f.lattice(), g.lattice());
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return s * f.lattice().cell_measure();
}

double distribution(const GridFunction& f, const Weight& u, double y) {
    require_same_lattice(f.lattice(), u.lattice());
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(f[i]) > y) s += u[i];
    return s * f.lattice().cell_measure();
}

std::vector<RearrangementStep> decreasing_rearrangement(const GridFunction& f, const Weight& u) {
    require_same_lattice(f.lattice(), u.lattice());
    return steps_of(sorted_desc(f, u, all_cells(f.size())));
}

LorentzNorms lorentz_norms(const GridFunction& f, const Weight& u, double r) {
    require_same_lattice(f.lattice(), u.lattice());
    if (!(r >= 1.0) || std::isinf(r)) throw std::invalid_argument("lorentz_norms requires 1 <= r < inf");
    LorentzNorms out;
    const double m = f.lattice().cell_measure();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(std::abs(f[i]), r) * u[i];
    out.lr = std::pow(s * m, 1.0 / r);

    const auto steps = decreasing_rearrangement(f, u);
    double lr1 = 0.0;
    for (std::size_t j = 0; j < steps.size(); ++j) {
        const double next = j + 1 < steps.size() ? steps[j + 1].value : 0.0;
        const double grow = std::pow(steps[j].mass_end, 1.0 / r);
        lr1 += (steps[j].value - next) * grow;
        out.lr_weak = std::max(out.lr_weak, steps[j].value * grow);
    }
    out.lr1 = r * lr1;
    return out;
}

double lorentz_r1_rearrangement(const GridFunction& f, const Weight& u, double r) {
    if (!(r >= 1.0) || std::isinf(r)) throw std::invalid_argument("lorentz_r1_rearrangement requires 1 <= r < inf");
    const auto steps = decreasing_rearrangement(f, u);
    double s = 0.0;
    double prev = 0.0;
    for (const auto& st : steps) {
        const double now = std::pow(st.mass_end, 1.0 / r);
        s += st.value * r * (now - prev);
        prev = now;
    }
    return s;
}

double weak_norm_on(const GridFunction& f, const Weight& u, double r, std::span<const std::size_t> cells) {
    require_same_lattice(f.lattice(), u.lattice());
    if (!(r >= 1.0)) throw std::invalid_argument("weak_norm_on requires r >= 1");
    double best = 0.0;
    if (std::isinf(r)) {
        for (std::size_t c : cells) best = std::max(best, std::abs(f[c]));
        return best;
    }
    for (const auto& st : steps_of(sorted_desc(f, u, cells)))
        best = std::max(best, st.value * std::pow(st.mass_end, 1.0 / r));
    return best;
}

// ---------------------------------------------------------------------------

double weak_dual_inner(const GridFunction& h, const Weight& wq, double q, std::span<const std::size_t> g_cells) {
    if (!(q >= 1.0)) throw std::invalid_argument("weak_dual_inner requires q >= 1");
    const double m = h.lattice().cell_measure();
    std::vector<std::size_t> order(g_cells.begin(), g_cells.end());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return h[a] < h[b] || (h[a] == h[b] && a < b);
    });
    double total = 0.0;
    for (std::size_t c : order) total += wq[c] * m;
    const double target = 0.5 * total;
    double mass = 0.0;
    double h_mass = 0.0;
    for (std::size_t c : order) {
        const double cm = wq[c] * m;
        if (mass + cm >= target) {
            h_mass += h[c] * (target - mass);
            mass = target;
            break;
        }
        mass += cm;
        h_mass += h[c] * cm;
    }
    return std::pow(target, -1.0 + 1.0 / q) * h_mass;
}

double weak_dual_inner_brute(const GridFunction& h, const Weight& wq, double q, std::span<const std::size_t> g_cells) {
    const std::size_t k = g_cells.size();
    if (k > 20) throw std::invalid_argument("weak_dual_inner_brute is limited to 20 cells");
    const double m = h.lattice().cell_measure();
    double total = 0.0;
    for (std::size_t c : g_cells) total += wq[c] * m;
    const double target = 0.5 * total;
    auto objective = [q](double mass, double h_mass) { return std::pow(mass, -1.0 + 1.0 / q) * h_mass; };
    double best = kInfinity;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
        double mass = 0.0, h_mass = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            if (mask >> i & 1) {
                mass += wq[g_cells[i]] * m;
                h_mass += h[g_cells[i]] * wq[g_cells[i]] * m;
            }
        if (mass >= target) {
            best = std::min(best, objective(mass, h_mass));
            continue;
        }
        // one further cell, fractionally, to reach exactly half the mass
        for (std::size_t j = 0; j < k; ++j) {
            if (mask >> j & 1) continue;
            const double cm = wq[g_cells[j]] * m;
            if (mass + cm < target) continue;
            const double take = target - mass;
            best = std::min(best, objective(target, h_mass + h[g_cells[j]] * take));
        }
    }
    return best;
}

WeakDualEstimate weak_dual_estimate(const GridFunction& h, const Weight& w, double q,
                                    std::span<const CellSet> candidates) {
    require_same_lattice(h.lattice(), w.lattice());
    if (!h.nonnegative()) throw std::invalid_argument("weak_dual_estimate requires h >= 0");
    if (candidates.empty()) throw std::invalid_argument("weak_dual_estimate requires at least one candidate");
    const Weight wq = w.pow(q);
    WeakDualEstimate out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].empty() || wq.measure(candidates[i]) <= 0.0) {
            ++out.skipped;
            continue;
        }
        const double v = weak_dual_inner(h, wq, q, candidates[i]);
        if (!out.best_candidate || v > out.value) {
            out.value = v;
            out.best_candidate = i;
        }
    }
    return out;
}

std::vector<CellSet> level_set_candidates(const GridFunction& h) {
    std::vector<double> levels(h.values().begin(), h.values().end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::vector<CellSet> out;
    for (double v : levels) {
        if (v <= 0.0) continue;
        CellSet set;
        for (std::size_t i = 0; i < h.size(); ++i)
            if (h[i] >= v) set.push_back(i);
        out.push_back(std::move(set));
    }
    out.push_back(all_cells(h.size()));
    return out;
}

void write_csv(std::ostream& os, const GridFunction& f) {
    os << "cell,value\n";
    char buf[64];
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", f[i]);
        os << i << ',' << buf << '\n';
    }
}

}  // namespace sdlab
