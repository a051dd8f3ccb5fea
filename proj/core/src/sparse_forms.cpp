#include "sdlab/sparse_forms.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sdlab {

namespace {

const Grid& grid_or_throw(const SparseFamily& family) {
    if (!family.grid) throw std::invalid_argument("sparse family has no grid");
    return *family.grid;
}

template <typename T>
std::string join(const std::vector<T>& v, char sep) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << sep;
        os << v[i];
    }
    return os.str();
}

template <typename T>
std::vector<T> split_numbers(const std::string& s, char sep) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const long long v = std::stoll(item, &used);
        if (used != item.size()) throw std::invalid_argument("malformed number in family CSV: " + item);
        out.push_back(static_cast<T>(v));
    }
    return out;
}

}  // namespace

double SparseFamily::measured_eta() const {
    if (members.empty()) return 1.0;
    const Grid& g = grid_or_throw(*this);
    double eta_min = 1.0;
    for (const auto& m : members) {
        const double cells = static_cast<double>(g.cells_in(g.id(m.cube)));
        eta_min = std::min(eta_min, static_cast<double>(m.e_cells.size()) / cells);
    }
    return eta_min;
}

SparseValidation validate(const SparseFamily& family) {
    const Grid& g = grid_or_throw(family);
    for (std::size_t i = 0; i < family.members.size(); ++i)
        if (!g.contains(family.members[i].cube))
            return {SparseViolation::ForeignCube, i, 0, "member " + std::to_string(i) + " is not a cube of the family grid"};

    std::vector<std::ptrdiff_t> owner(g.cell_count(), -1);
    for (std::size_t i = 0; i < family.members.size(); ++i) {
        for (std::size_t c : family.members[i].e_cells) {
            if (c >= owner.size())
                return {SparseViolation::NotContained, i, 0,
                        "E_Q of member " + std::to_string(i) + " names cell " + std::to_string(c) + " outside the domain"};
            if (owner[c] >= 0)
                return {SparseViolation::NotDisjoint, static_cast<std::size_t>(owner[c]), i,
                        "E_Q of members " + std::to_string(owner[c]) + " and " + std::to_string(i) + " share cell " +
                            std::to_string(c)};
            owner[c] = static_cast<std::ptrdiff_t>(i);
        }
    }

    for (std::size_t i = 0; i < family.members.size(); ++i) {
        const auto& m = family.members[i];
        const auto cells = g.cells(g.id(m.cube));
        for (std::size_t c : m.e_cells)
            if (!std::binary_search(cells.begin(), cells.end(), c))
                return {SparseViolation::NotContained, i, 0,
                        "E_Q of member " + std::to_string(i) + " contains cell " + std::to_string(c) + " outside Q"};
        if (static_cast<double>(m.e_cells.size()) < family.eta * static_cast<double>(cells.size()))
            return {SparseViolation::TooSmall, i, 0, "member " + std::to_string(i) + " has |E_Q| < eta |Q|"};
    }
    return {};
}

SparseFamily build_stopping_family(const GridFunction& f, double p0, std::shared_ptr<const Grid> grid, double rho) {
    if (!grid) throw std::invalid_argument("build_stopping_family requires a grid");
    if (!(f.lattice() == grid->lattice())) throw std::invalid_argument("build_stopping_family: lattice mismatch");
    if (!(p0 >= 1.0) || std::isinf(p0)) throw std::invalid_argument("build_stopping_family requires 1 <= p0 < inf");
    if (!(rho > 1.0)) throw std::invalid_argument("build_stopping_family requires rho > 1");
    const Grid& g = *grid;
    const auto sums = cube_sums(g, f.abs_pow(p0).values());
    auto avg = [&](std::size_t id) { return sums[id] / static_cast<double>(g.cells_in(id)); };
    const double rho_p = std::pow(rho, p0);

    std::vector<std::size_t> stack;
    for (std::size_t t : g.tops())
        if (avg(t) > 0.0) stack.push_back(t);
    if (stack.empty()) throw std::invalid_argument("build_stopping_family: f vanishes identically");

    std::vector<std::size_t> selected;
    std::vector<std::vector<std::size_t>> stops_of;
    while (!stack.empty()) {
        const std::size_t q = stack.back();
        stack.pop_back();
        const double threshold = rho_p * avg(q);
        std::vector<std::size_t> stops;
        std::vector<std::size_t> walk(g.children(q).begin(), g.children(q).end());
        while (!walk.empty()) {
            const std::size_t r = walk.back();
            walk.pop_back();
            if (avg(r) >= threshold) {
                stops.push_back(r);
            } else {
                for (std::size_t ch : g.children(r)) walk.push_back(ch);
            }
        }
        selected.push_back(q);
        stops_of.push_back(stops);
        for (std::size_t s : stops) stack.push_back(s);
    }

    // (level, index) order for reproducible output
    std::vector<std::size_t> order(selected.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return selected[a] < selected[b]; });

    SparseFamily family{grid, {}, 1.0};
    for (std::size_t i : order) {
        std::vector<char> removed(g.cell_count(), 0);
        for (std::size_t s : stops_of[i])
            for (std::size_t c : g.cells(s)) removed[c] = 1;
        SparseMember m{g.cube(selected[i]), {}};
        for (std::size_t c : g.cells(selected[i]))
            if (!removed[c]) m.e_cells.push_back(c);
        family.members.push_back(std::move(m));
    }
    family.eta = family.measured_eta();
    if (!(family.eta > 0.0)) throw std::runtime_error("stopping family has a member with empty E_Q");
    return family;
}

SparseFamily chain_family(std::shared_ptr<const Grid> grid, std::size_t cell) {
    if (!grid) throw std::invalid_argument("chain_family requires a grid");
    const Grid& g = *grid;
    if (cell >= g.cell_count()) throw std::out_of_range("chain_family: cell out of range");
    std::vector<std::size_t> chain;
    std::optional<std::size_t> r = g.leaf(cell);
    while (r) {
        chain.push_back(*r);
        r = g.parent(*r);
    }
    std::reverse(chain.begin(), chain.end());
    SparseFamily family{grid, {}, 1.0};
    for (std::size_t i = 0; i < chain.size(); ++i) {
        SparseMember m{g.cube(chain[i]), {}};
        const auto cells = g.cells(chain[i]);
        if (i + 1 < chain.size()) {
            const auto inner = g.cells(chain[i + 1]);
            std::set_difference(cells.begin(), cells.end(), inner.begin(), inner.end(), std::back_inserter(m.e_cells));
        } else {
            m.e_cells.assign(cells.begin(), cells.end());
        }
        family.members.push_back(std::move(m));
    }
    family.eta = family.measured_eta();
    return family;
}

GridFunction sparse_operator(const SparseFamily& family, const GridFunction& f, double alpha) {
    const Grid& g = grid_or_throw(family);
    if (!(f.lattice() == g.lattice())) throw std::invalid_argument("sparse_operator: lattice mismatch");
    if (!(alpha >= 0.0 && alpha < g.dimension())) throw std::invalid_argument("sparse_operator requires 0 <= alpha < n");
    const double m = g.cell_measure();
    std::vector<double> out(f.size(), 0.0);
    for (const auto& member : family.members) {
        const std::size_t id = g.id(member.cube);
        const auto cells = g.cells(id);
        double s = 0.0;
        for (std::size_t c : cells) s += std::abs(f[c]);
        const double q_measure = g.measure(id);
        const double term = std::pow(q_measure, alpha / g.dimension()) * (s * m / q_measure);
        for (std::size_t c : cells) out[c] += term;
    }
    return {f.lattice(), std::move(out)};
}

double bilinear_form(std::span<const SparseFamily> families, const GridFunction& f, const GridFunction& g,
                     const ExponentTuple& e) {
    e.validate();
    const double q0c = e.q0_conj();
    double total = 0.0;
    for (const auto& family : families) {
        const Grid& grid = grid_or_throw(family);
        if (grid.dimension() != e.n) throw std::invalid_argument("bilinear_form: dimension mismatch");
        for (const auto& member : family.members) {
            const std::size_t id = grid.id(member.cube);
            total += local_average(f, 0.0, e.p0, grid, id) * local_average(g, e.alpha, q0c, grid, id) * grid.measure(id);
        }
    }
    return total;
}

GridFunction multiplier_eval(const SparseFamily& family, const GridFunction& f, const Weight& w, double alpha) {
    const GridFunction inner = f * w.function().map([](double x) { return 1.0 / x; });
    return w.function() * sparse_operator(family, inner, alpha);
}

void write_family_csv(std::ostream& os, const SparseFamily& family) {
    os << "shift,level,index,e_cells\n";
    for (const auto& m : family.members)
        os << join(m.cube.shift, ':') << ',' << m.cube.level << ',' << join(m.cube.index, ':') << ','
           << join(m.e_cells, ' ') << '\n';
}

SparseFamily read_family_csv(std::istream& is, std::shared_ptr<const Grid> grid, double eta) {
    if (!grid) throw std::invalid_argument("read_family_csv requires a grid");
    SparseFamily family{grid, {}, eta};
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            if (line.rfind("shift", 0) == 0) continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() == 3) fields.emplace_back();
        if (fields.size() != 4) throw std::invalid_argument("family CSV rows need 4 fields: " + line);
        SparseMember m;
        m.cube.shift = split_numbers<int>(fields[0], ':');
        m.cube.level = std::stoi(fields[1]);
        m.cube.index = split_numbers<std::int64_t>(fields[2], ':');
        m.e_cells = split_numbers<std::size_t>(fields[3], ' ');
        std::sort(m.e_cells.begin(), m.e_cells.end());
        if (!grid->contains(m.cube)) throw std::invalid_argument("family CSV cube is not in the grid: " + line);
        family.members.push_back(std::move(m));
    }
    return family;
}

}  // namespace sdlab
