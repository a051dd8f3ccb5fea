#include "sdlab/dyadic_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sdlab {

namespace {

constexpr std::size_t kMaxCells = std::size_t{1} << 22;

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    const std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t m) {
    return (a - floor_mod(a, m)) / m;
}

// Offset of the level-k lattice for a unit shift component, in finest-cell units:
// sum_{j=k}^{L-1} (-1)^j 2^{L-j-1}.
std::int64_t unit_offset(int level, int depth) {
    std::int64_t off = 0;
    for (int j = level; j < depth; ++j) {
        const std::int64_t term = std::int64_t{1} << (depth - j - 1);
        off += (j % 2 == 0) ? term : -term;
    }
    return off;
}

}  // namespace

double CellLattice::cell_measure() const {
    return std::ldexp(1.0, -dimension * depth);
}

bool GridSpec::is_standard() const {
    return std::all_of(shift.begin(), shift.end(), [](int a) { return a == 0; });
}

std::string GridSpec::to_string() const {
    std::ostringstream os;
    os << "n=" << dimension << ",L=" << depth << ",a=";
    for (int d = 0; d < dimension; ++d) {
        if (d) os << ':';
        os << (shift.empty() ? 0 : shift[d]);
    }
    return os.str();
}

const char* to_string(Relation r) {
    switch (r) {
        case Relation::Disjoint: return "Disjoint";
        case Relation::QInR: return "QinR";
        case Relation::RInQ: return "RinQ";
        case Relation::Equal: return "Equal";
    }
    return "?";
}

Grid::Grid(GridSpec spec) : spec_(std::move(spec)) {
    if (spec_.dimension < 1) throw std::invalid_argument("grid dimension must be >= 1");
    if (spec_.depth < 0) throw std::invalid_argument("grid depth must be >= 0");
    if (spec_.shift.empty()) spec_.shift.assign(spec_.dimension, 0);
    if (static_cast<int>(spec_.shift.size()) != spec_.dimension)
        throw std::invalid_argument("shift vector length must equal the dimension");
    for (int a : spec_.shift)
        if (a < 0 || a > 2) throw std::invalid_argument("shift components must lie in {0,1,2}");
    if (spec_.dimension * spec_.depth > 22 || lattice().cell_count() > kMaxCells)
        throw std::invalid_argument("grid too large (more than 2^22 cells)");

    const int n = spec_.dimension;
    const int depth = spec_.depth;
    const auto side_cells = static_cast<std::int64_t>(lattice().side_cells());

    origin_.assign(depth + 1, std::vector<std::int64_t>(n));
    count_.assign(depth + 1, std::vector<std::int64_t>(n));
    level_begin_.assign(depth + 2, 0);
    for (int k = 0; k <= depth; ++k) {
        const std::int64_t side = std::int64_t{1} << (depth - k);
        std::size_t level_cubes = 1;
        for (int d = 0; d < n; ++d) {
            origin_[k][d] = floor_mod(spec_.shift[d] * unit_offset(k, depth), side);
            count_[k][d] = (side_cells - origin_[k][d]) / side;
            level_cubes *= static_cast<std::size_t>(count_[k][d]);
        }
        level_begin_[k + 1] = level_begin_[k] + level_cubes;
    }

    const std::size_t total = level_begin_.back();
    cubes_.reserve(total);
    for (int k = 0; k <= depth; ++k) {
        const std::size_t count = level_begin_[k + 1] - level_begin_[k];
        for (std::size_t lin = 0; lin < count; ++lin) {
            DyadicCube q{spec_.shift, k, std::vector<std::int64_t>(n)};
            std::size_t rest = lin;
            for (int d = 0; d < n; ++d) {
                q.index[d] = static_cast<std::int64_t>(rest % count_[k][d]);
                rest /= count_[k][d];
            }
            cubes_.push_back(std::move(q));
        }
    }

    parent_.assign(total, -1);
    std::vector<std::vector<std::size_t>> kids(total);
    for (std::size_t id = 0; id < total; ++id) {
        const DyadicCube& q = cubes_[id];
        if (q.level == 0) continue;
        DyadicCube up{spec_.shift, q.level - 1, std::vector<std::int64_t>(n)};
        const std::int64_t side_up = std::int64_t{1} << (depth - q.level + 1);
        const std::int64_t side = std::int64_t{1} << (depth - q.level);
        bool inside = true;
        for (int d = 0; d < n; ++d) {
            const std::int64_t lo = origin_[q.level][d] + q.index[d] * side;
            up.index[d] = floor_div(lo - origin_[q.level - 1][d], side_up);
            if (up.index[d] < 0 || up.index[d] >= count_[q.level - 1][d]) inside = false;
        }
        if (inside) {
            const std::size_t pid = id_unchecked(up);
            parent_[id] = static_cast<std::ptrdiff_t>(pid);
            kids[pid].push_back(id);
        }
    }
    child_begin_.assign(total + 1, 0);
    for (std::size_t id = 0; id < total; ++id) {
        child_begin_[id + 1] = child_begin_[id] + kids[id].size();
        child_ids_.insert(child_ids_.end(), kids[id].begin(), kids[id].end());
        if (parent_[id] < 0) tops_.push_back(id);
    }

    cell_begin_.assign(total + 1, 0);
    cell_ids_.reserve(lattice().cell_count() * static_cast<std::size_t>(depth + 1));
    for (std::size_t id = 0; id < total; ++id) {
        const auto ext = extent(cubes_[id]);
        std::vector<std::int64_t> c(n);
        for (int d = 0; d < n; ++d) c[d] = ext[d].lo;
        std::vector<std::size_t> list;
        while (true) {
            std::size_t lin = 0;
            for (int d = n - 1; d >= 0; --d) lin = lin * static_cast<std::size_t>(side_cells) + static_cast<std::size_t>(c[d]);
            list.push_back(lin);
            int d = 0;
            while (d < n) {
                if (++c[d] < ext[d].hi) break;
                c[d] = ext[d].lo;
                ++d;
            }
            if (d == n) break;
        }
        std::sort(list.begin(), list.end());
        cell_begin_[id + 1] = cell_begin_[id] + list.size();
        cell_ids_.insert(cell_ids_.end(), list.begin(), list.end());
    }
}

std::size_t Grid::id_unchecked(const DyadicCube& q) const {
    std::size_t lin = 0;
    for (int d = spec_.dimension - 1; d >= 0; --d)
        lin = lin * static_cast<std::size_t>(count_[q.level][d]) + static_cast<std::size_t>(q.index[d]);
    return level_begin_[q.level] + lin;
}

namespace {

bool same_shift(const std::vector<int>& cube, const std::vector<int>& grid) {
    if (cube.empty()) return std::all_of(grid.begin(), grid.end(), [](int a) { return a == 0; });
    return cube == grid;
}

}  // namespace

void Grid::check_shift(const DyadicCube& q) const {
    if (!same_shift(q.shift, spec_.shift)) throw ShiftMismatchError("cube belongs to a grid with a different shift");
}

int Grid::level_of(std::size_t id) const {
    return cubes_.at(id).level;
}

bool Grid::contains(const DyadicCube& q) const {
    if (!same_shift(q.shift, spec_.shift) || q.level < 0 || q.level > spec_.depth) return false;
    if (static_cast<int>(q.index.size()) != spec_.dimension) return false;
    for (int d = 0; d < spec_.dimension; ++d)
        if (q.index[d] < 0 || q.index[d] >= count_[q.level][d]) return false;
    return true;
}

std::size_t Grid::id(const DyadicCube& q) const {
    check_shift(q);
    if (!contains(q)) throw std::out_of_range("cube is not part of this grid");
    return id_unchecked(q);
}

std::optional<std::size_t> Grid::parent(std::size_t id) const {
    const std::ptrdiff_t p = parent_.at(id);
    if (p < 0) return std::nullopt;
    return static_cast<std::size_t>(p);
}

std::optional<DyadicCube> Grid::parent(const DyadicCube& q) const {
    const auto p = parent(id(q));
    if (!p) return std::nullopt;
    return cubes_[*p];
}

std::span<const std::size_t> Grid::children(std::size_t id) const {
    return {child_ids_.data() + child_begin_.at(id), child_begin_.at(id + 1) - child_begin_[id]};
}

std::span<const std::size_t> Grid::cells(std::size_t id) const {
    return {cell_ids_.data() + cell_begin_.at(id), cell_begin_.at(id + 1) - cell_begin_[id]};
}

std::size_t Grid::cells_in(std::size_t id) const {
    return cell_begin_.at(id + 1) - cell_begin_[id];
}

double Grid::measure(std::size_t id) const {
    return std::ldexp(1.0, -spec_.dimension * cubes_.at(id).level);
}

std::vector<CellInterval> Grid::extent(const DyadicCube& q) const {
    check_shift(q);
    if (!contains(q)) throw std::out_of_range("cube is not part of this grid");
    const std::int64_t side = std::int64_t{1} << (spec_.depth - q.level);
    std::vector<CellInterval> ext(spec_.dimension);
    for (int d = 0; d < spec_.dimension; ++d) {
        ext[d].lo = origin_[q.level][d] + q.index[d] * side;
        ext[d].hi = ext[d].lo + side;
    }
    return ext;
}

Relation Grid::relation(const DyadicCube& q, const DyadicCube& r) const {
    check_shift(q);
    check_shift(r);
    const auto eq = extent(q);
    const auto er = extent(r);
    bool q_in_r = true, r_in_q = true;
    for (int d = 0; d < spec_.dimension; ++d) {
        if (eq[d].hi <= er[d].lo || er[d].hi <= eq[d].lo) return Relation::Disjoint;
        q_in_r = q_in_r && er[d].lo <= eq[d].lo && eq[d].hi <= er[d].hi;
        r_in_q = r_in_q && eq[d].lo <= er[d].lo && er[d].hi <= eq[d].hi;
    }
    if (q_in_r && r_in_q) return Relation::Equal;
    if (q_in_r) return Relation::QInR;
    if (r_in_q) return Relation::RInQ;
    // Unreachable for a dyadic grid; kept as a hard failure rather than a fifth case.
    throw std::logic_error("partial overlap between cubes of one dyadic grid");
}

std::vector<Grid> all_shifted_grids(CellLattice lattice) {
    std::vector<Grid> grids;
    std::size_t total = 1;
    for (int d = 0; d < lattice.dimension; ++d) total *= 3;
    grids.reserve(total);
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<int> a(lattice.dimension);
        std::size_t rest = code;
        for (int d = 0; d < lattice.dimension; ++d) {
            a[d] = static_cast<int>(rest % 3);
            rest /= 3;
        }
        grids.emplace_back(GridSpec{lattice.dimension, lattice.depth, std::move(a)});
    }
    return grids;
}

}  // namespace sdlab
