#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "sdlab/cz_decomposition.hpp"
#include "sdlab/weight_constants.hpp"

using namespace sdlab;

namespace {

double integral(const GridFunction& f, const Weight& u, std::span<const std::size_t> cells) {
    double s = 0.0;
    for (std::size_t c : cells) s += f[c] * u[c];
    return s * f.lattice().cell_measure();
}

struct Instance {
    GridFunction h;
    Weight u;
    double lambda;
};

Instance random_instance(gen::Rng& r, CellLattice lat, const Grid& g) {
    auto h = gen::function(r, lat, 0.3);
    auto u = gen::weight(r, lat);
    double top = 0.0;
    for (std::size_t t : g.tops()) {
        const auto cells = g.cells(t);
        top = std::max(top, integral(h, u, cells) / u.measure(cells));
    }
    if (top == 0.0) top = 1.0;
    return {std::move(h), std::move(u), top * r.uniform(1.05, 6.0)};
}

}  // namespace

TEST_CASE("empty decomposition when every average is below lambda") {
    const Grid g(GridSpec{1, 3, {}});
    const auto h = GridFunction::constant(g.lattice(), 1.0);
    const auto out = decompose(h, Weight::lebesgue(g.lattice()), 2.0, g);
    const auto* d = std::get_if<CZDecomposition>(&out);
    REQUIRE(d);
    CHECK(d->maximal.empty());
    CHECK(d->omega.empty());
    CHECK(d->good == h);
    for (double v : d->bad.values()) CHECK(v == 0.0);
}

TEST_CASE("indicator of the first quarter at lambda 1/3") {
    const Grid g(GridSpec{1, 2, {}});
    const auto h = GridFunction::indicator(g.lattice(), std::vector<std::size_t>{0});
    const auto out = decompose(h, Weight::lebesgue(g.lattice()), 1.0 / 3.0, g);
    const auto& d = std::get<CZDecomposition>(out);
    REQUIRE(d.maximal.size() == 1);
    CHECK(g.cube(d.maximal[0]) == DyadicCube{{0}, 1, {0}});
    CHECK(d.omega == CellSet{0, 1});
    CHECK(d.good == GridFunction(g.lattice(), {0.5, 0.5, 0, 0}));
    CHECK(d.bad == GridFunction(g.lattice(), {0.5, -0.5, 0, 0}));
}

TEST_CASE("root above lambda is a distinct outcome; lambda must be positive") {
    const Grid g(GridSpec{1, 3, {}});
    const auto h = GridFunction::constant(g.lattice(), 1.0);
    const auto out = decompose(h, Weight::lebesgue(g.lattice()), 0.5, g);
    const auto* root = std::get_if<RootExceedsThreshold>(&out);
    REQUIRE(root);
    CHECK(root->cube == 0);
    CHECK(root->average == 1.0);
    CHECK_THROWS(decompose(h, Weight::lebesgue(g.lattice()), 0.0, g));
    CHECK_THROWS(decompose(GridFunction(g.lattice(), {1, -1, 0, 0, 0, 0, 0, 0}), Weight::lebesgue(g.lattice()), 2.0, g));
}

TEST_CASE("integer data decomposes bitwise exactly") {
    gen::Rng r(139);
    for (int t = 0; t < 40; ++t) {
        const CellLattice lat{1 + t % 2, t % 2 ? 3 : 6};
        const Grid g(GridSpec{lat.dimension, lat.depth, {}});
        const auto h = gen::integer_function(r, lat, 0, 16);
        double avg = 0.0;
        for (double v : h.values()) avg += v;
        avg /= static_cast<double>(h.size());
        const auto out = decompose(h, Weight::lebesgue(lat), std::max(avg, 0.5) * r.uniform(1.0, 3.0), g);
        const auto& d = std::get<CZDecomposition>(out);
        for (std::size_t c = 0; c < h.size(); ++c) CHECK(d.good[c] + d.bad[c] == h[c]);
    }
}

TEST_CASE("decomposition invariants on random weighted instances") {
    gen::Rng r(149);
    for (int t = 0; t < 60; ++t) {
        const int n = 1 + t % 2;
        const CellLattice lat{n, n == 1 ? 7 : 4};
        const Grid g(GridSpec{n, lat.depth, {}});
        const auto inst = random_instance(r, lat, g);
        const auto out = decompose(inst.h, inst.u, inst.lambda, g);
        const auto& d = std::get<CZDecomposition>(out);
        const double mass = integral(inst.h, inst.u, std::vector<std::size_t>(g.cells(0).begin(), g.cells(0).end()));

        // g + b = h within one rounding of the subtraction
        for (std::size_t c = 0; c < inst.h.size(); ++c)
            CHECK(std::fabs(d.good[c] + d.bad[c] - inst.h[c]) <= std::ldexp(inst.h.max_abs(), -52));

        std::vector<bool> in_omega(inst.h.size(), false);
        for (std::size_t c : d.omega) in_omega[c] = true;
        for (std::size_t c = 0; c < inst.h.size(); ++c)
            if (!in_omega[c]) CHECK(d.bad[c] == 0.0);

        std::size_t covered = 0;
        for (std::size_t p : d.maximal) {
            const auto cells = g.cells(p);
            covered += cells.size();
            const double local = integral(inst.h, inst.u, cells);
            CHECK(std::fabs(integral(d.bad, inst.u, cells)) <= 1e-12 * local);
            CHECK(local / inst.u.measure(cells) > inst.lambda);
            const auto parent = g.parent(p);
            if (parent) {
                const auto pc = g.cells(*parent);
                CHECK(integral(inst.h, inst.u, pc) <= inst.lambda * inst.u.measure(pc) * (1 + 1e-12));
            }
        }
        CHECK(covered == d.omega.size());

        const double good_mass = integral(d.good, inst.u, std::vector<std::size_t>(g.cells(0).begin(), g.cells(0).end()));
        CHECK(good_mass == doctest::Approx(mass).epsilon(1e-12));
        CHECK(inst.u.measure(d.omega) <= mass / inst.lambda * (1 + 1e-12));

        const double doubling = doubling_constant(inst.u, std::ldexp(1.0, -n), one_grid(g)).value;
        CHECK(d.good.max_abs() <= doubling * inst.lambda * (1 + 1e-12));

        // cubes that are not strictly inside a maximal cube keep their mass
        for (std::size_t q = 0; q < g.cube_count(); ++q) {
            bool strictly_inside = false;
            for (std::size_t p : d.maximal)
                strictly_inside = strictly_inside || g.relation(g.cube(q), g.cube(p)) == Relation::QInR;
            if (strictly_inside) continue;
            const auto cells = g.cells(q);
            const double hq = integral(inst.h, inst.u, cells);
            CHECK(std::fabs(integral(d.good, inst.u, cells) - hq) <= 1e-12 * std::max(hq, mass * 1e-3));
        }
    }
}

TEST_CASE("weighted averages match direct sums") {
    gen::Rng r(151);
    const CellLattice lat{2, 3};
    const Grid g(GridSpec{2, 3, {1, 2}});
    const auto h = gen::function(r, lat);
    const auto u = gen::weight(r, lat);
    const auto avg = weighted_averages(h, u, g);
    for (std::size_t q = 0; q < g.cube_count(); ++q) {
        const auto cells = g.cells(q);
        CHECK(avg[q] == doctest::Approx(integral(h, u, cells) / u.measure(cells)).epsilon(1e-13));
    }
}
