#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdlab {

/// Raised when a cube is used with a grid whose shift does not match.
class ShiftMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Number of cells along each axis and dimension of the finest lattice.
/// Functions live on this lattice independently of any grid shift.
struct CellLattice {
    int dimension = 1;
    int depth = 0;

    [[nodiscard]] std::size_t side_cells() const { return std::size_t{1} << depth; }
    [[nodiscard]] std::size_t cell_count() const { return std::size_t{1} << (dimension * depth); }
    [[nodiscard]] double cell_measure() const;

    friend bool operator==(const CellLattice&, const CellLattice&) = default;
};

/// {n, L, a}: dimension, depth and shift vector a in {0,1,2}^n.
struct GridSpec {
    int dimension = 1;
    int depth = 0;
    std::vector<int> shift;  // empty means the standard grid

    [[nodiscard]] CellLattice lattice() const { return {dimension, depth}; }
    [[nodiscard]] bool is_standard() const;
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// A cube of a (possibly shifted) dyadic grid. Identity is (shift, level, index);
/// the geometry is derived by the owning Grid and never stored as floats. An
/// empty shift denotes the standard grid.
struct DyadicCube {
    std::vector<int> shift;
    int level = 0;
    std::vector<std::int64_t> index;

    friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
};

/// Set relation of two cubes Q, R of one grid.
enum class Relation { Disjoint, QInR, RInQ, Equal };

const char* to_string(Relation r);

/// Half-open interval [lo, hi) in finest-cell units along one axis.
struct CellInterval {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
};

/// Truncation of a dyadic grid to the cubes of levels 0..L that lie wholly
/// inside [0,1)^n. Immutable after construction.
///
/// Shifted grids use the lattice 2^-k([0,1)^n + m + (-1)^k a/3) translated by
/// the sub-cell amount -a(-1)^L/(3*2^L), which puts every cube endpoint on the
/// finest-cell lattice while keeping the nesting of the shifted family.
class Grid {
public:
    explicit Grid(GridSpec spec);

    [[nodiscard]] const GridSpec& spec() const { return spec_; }
    [[nodiscard]] CellLattice lattice() const { return spec_.lattice(); }
    [[nodiscard]] int dimension() const { return spec_.dimension; }
    [[nodiscard]] int depth() const { return spec_.depth; }
    [[nodiscard]] std::size_t cell_count() const { return lattice().cell_count(); }
    [[nodiscard]] double cell_measure() const { return lattice().cell_measure(); }

    [[nodiscard]] std::size_t cube_count() const { return parent_.size(); }
    [[nodiscard]] std::span<const DyadicCube> cubes() const { return cubes_; }
    [[nodiscard]] const DyadicCube& cube(std::size_t id) const { return cubes_.at(id); }

    /// Cubes of one level, as a contiguous id range [first, last).
    [[nodiscard]] std::size_t level_begin(int level) const { return level_begin_.at(level); }
    [[nodiscard]] std::size_t level_end(int level) const { return level_begin_.at(level + 1); }
    [[nodiscard]] int level_of(std::size_t id) const;

    [[nodiscard]] bool contains(const DyadicCube& q) const;
    /// Dense id of a cube; throws ShiftMismatchError or std::out_of_range.
    [[nodiscard]] std::size_t id(const DyadicCube& q) const;

    [[nodiscard]] std::optional<std::size_t> parent(std::size_t id) const;
    [[nodiscard]] std::optional<DyadicCube> parent(const DyadicCube& q) const;
    [[nodiscard]] std::span<const std::size_t> children(std::size_t id) const;
    /// Finest cells covered by the cube, ascending.
    [[nodiscard]] std::span<const std::size_t> cells(std::size_t id) const;
    [[nodiscard]] std::span<const std::size_t> cells(const DyadicCube& q) const { return cells(id(q)); }
    /// Id of the level-L cube that is exactly this cell.
    [[nodiscard]] std::size_t leaf(std::size_t cell) const { return level_begin_.back() - cell_count() + cell; }
    /// Cubes with no parent inside the grid (just the root for a standard grid).
    [[nodiscard]] std::span<const std::size_t> tops() const { return tops_; }

    [[nodiscard]] double measure(std::size_t id) const;
    [[nodiscard]] double measure(const DyadicCube& q) const { return measure(id(q)); }
    [[nodiscard]] std::size_t cells_in(std::size_t id) const;

    [[nodiscard]] std::vector<CellInterval> extent(const DyadicCube& q) const;
    [[nodiscard]] Relation relation(const DyadicCube& q, const DyadicCube& r) const;

private:
    void check_shift(const DyadicCube& q) const;
    std::size_t id_unchecked(const DyadicCube& q) const;

    GridSpec spec_;
    std::vector<std::vector<std::int64_t>> origin_;  // [level][axis], cell units
    std::vector<std::vector<std::int64_t>> count_;   // [level][axis]
    std::vector<std::size_t> level_begin_;
    std::vector<DyadicCube> cubes_;
    std::vector<std::ptrdiff_t> parent_;
    std::vector<std::size_t> child_begin_;
    std::vector<std::size_t> child_ids_;
    std::vector<std::size_t> cell_begin_;
    std::vector<std::size_t> cell_ids_;
    std::vector<std::size_t> tops_;
};

/// All 3^n shifted grids of the given lattice, the standard grid first.
std::vector<Grid> all_shifted_grids(CellLattice lattice);

}  // namespace sdlab
