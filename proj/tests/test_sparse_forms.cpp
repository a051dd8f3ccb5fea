#include <doctest.h>

#include <cmath>
#include <sstream>

#include "generators.hpp"
#include "sdlab/sparse_forms.hpp"

using namespace sdlab;

namespace {

std::shared_ptr<const Grid> standard(int n, int depth) { return std::make_shared<const Grid>(GridSpec{n, depth, {}}); }

SparseFamily root_family(std::shared_ptr<const Grid> g) {
    SparseFamily s{g, {}, 1.0};
    const auto cells = g->cells(0);
    s.members.push_back({g->cube(0), CellSet(cells.begin(), cells.end())});
    return s;
}

// Random sparse family: random cubes, each claiming its unclaimed cells.
SparseFamily random_family(gen::Rng& r, std::shared_ptr<const Grid> g, std::size_t count) {
    SparseFamily s{g, {}, 0.0};
    std::vector<bool> taken(g->cell_count(), false);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t id = r.index(g->cube_count());
        CellSet e;
        for (std::size_t c : g->cells(id))
            if (!taken[c] && r.coin(0.7)) {
                taken[c] = true;
                e.push_back(c);
            }
        s.members.push_back({g->cube(id), e});
    }
    s.eta = s.measured_eta();
    return s;
}

// sum over members and over cells of the member cube, no tree sums.
GridFunction naive_operator(const SparseFamily& s, const GridFunction& f, double alpha) {
    std::vector<double> out(f.size(), 0.0);
    const Grid& g = *s.grid;
    for (const auto& m : s.members) {
        const std::size_t id = g.id(m.cube);
        double integral = 0.0;
        for (std::size_t c : g.cells(id)) integral += f[c] * g.cell_measure();
        const double q = g.measure(id);
        for (std::size_t c : g.cells(id)) out[c] += std::pow(q, alpha / g.dimension()) * integral / q;
    }
    return {f.lattice(), out};
}

}  // namespace

TEST_CASE("validate examples") {
    const auto g = standard(1, 2);
    CHECK(validate(root_family(g)).ok());

    SparseFamily bad{g, {}, 0.5};
    bad.members.push_back({DyadicCube{{}, 1, {0}}, {0, 2}});
    const auto v = validate(bad);
    CHECK(v.kind == SparseViolation::NotContained);

    SparseFamily overlap{g, {}, 0.5};
    overlap.members.push_back({DyadicCube{{}, 0, {0}}, {0, 1}});
    overlap.members.push_back({DyadicCube{{}, 1, {0}}, {0, 1}});
    const auto o = validate(overlap);
    CHECK(o.kind == SparseViolation::NotDisjoint);
    CHECK(o.member == 0);
    CHECK(o.other == 1);

    SparseFamily small{g, {}, 0.75};
    small.members.push_back({DyadicCube{{}, 0, {0}}, {0, 1}});
    CHECK(validate(small).kind == SparseViolation::TooSmall);

    SparseFamily foreign{g, {}, 0.5};
    foreign.members.push_back({DyadicCube{{1}, 0, {0}}, {}});
    CHECK(validate(foreign).kind == SparseViolation::ForeignCube);
}

TEST_CASE("two halves claiming the same E are not disjoint") {
    const auto g = standard(1, 1);
    SparseFamily s{g, {}, 0.5};
    s.members.push_back({DyadicCube{{}, 1, {0}}, {0}});
    s.members.push_back({DyadicCube{{}, 1, {1}}, {0}});
    const auto v = validate(s);
    CHECK(v.kind == SparseViolation::NotDisjoint);
    CHECK(v.message.find("share cell 0") != std::string::npos);
}

TEST_CASE("stopping family examples") {
    const auto g = standard(1, 2);
    const auto one = build_stopping_family(GridFunction::constant(g->lattice(), 1.0), 1.0, g, 2.0);
    REQUIRE(one.members.size() == 1);
    CHECK(one.members[0].cube.level == 0);
    CHECK(one.eta == 1.0);

    const auto ind = GridFunction::indicator(g->lattice(), std::vector<std::size_t>{0});
    const auto s = build_stopping_family(ind, 1.0, g, 2.0);
    REQUIRE(s.members.size() == 3);
    CHECK(s.members[0].cube == DyadicCube{{0}, 0, {0}});
    CHECK(s.members[1].cube == DyadicCube{{0}, 1, {0}});
    CHECK(s.members[2].cube == DyadicCube{{0}, 2, {0}});
    CHECK(s.eta == 0.5);
    CHECK(validate(s).ok());
    CHECK_THROWS(build_stopping_family(GridFunction::constant(g->lattice(), 0.0), 1.0, g, 2.0));
    CHECK_THROWS(build_stopping_family(ind, 1.0, g, 1.0));
}

TEST_CASE("stopping families are always valid") {
    gen::Rng r(83);
    for (int t = 0; t < 40; ++t) {
        const int n = 1 + t % 2;
        const auto g = t % 3 == 0 ? std::make_shared<const Grid>(GridSpec{n, n == 1 ? 6 : 3, std::vector<int>(n, 1)})
                                  : standard(n, n == 1 ? 6 : 3);
        const auto f = gen::function(r, g->lattice(), 0.5);
        bool any = false;
        for (double v : f.values()) any = any || v > 0.0;
        if (!any) continue;
        const double rho = r.uniform(1.1, 4.0);
        const auto s = build_stopping_family(f, r.uniform(1.0, 3.0), g, rho);
        CHECK(validate(s).ok());
        CHECK(s.eta == doctest::Approx(s.measured_eta()));
        CHECK(s.eta > 0.0);
    }
}

TEST_CASE("chain family") {
    const auto g = standard(1, 4);
    const auto s = chain_family(g, 5);
    CHECK(s.members.size() == 5);
    CHECK(validate(s).ok());
    CHECK(s.eta == 0.5);
    const auto g2 = standard(2, 3);
    CHECK(chain_family(g2, 0).eta == 0.75);
}

TEST_CASE("sparse operator examples") {
    const auto g = standard(1, 3);
    const auto one = GridFunction::constant(g->lattice(), 1.0);
    for (double alpha : {0.0, 0.3, 0.9}) {
        const auto t = sparse_operator(root_family(g), one, alpha);
        for (double v : t.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    }
    SparseFamily two{g, {}, 0.5};
    const auto r = root_family(g);
    two.members.push_back(r.members[0]);
    two.members.push_back({DyadicCube{{}, 1, {0}}, {0, 1, 2, 3}});
    two.members[0].e_cells = {4, 5, 6, 7};
    const auto t = sparse_operator(two, one, 0.0);
    for (std::size_t c = 0; c < 8; ++c) CHECK(t[c] == (c < 4 ? 2.0 : 1.0));
    CHECK_THROWS(sparse_operator(two, GridFunction::constant(CellLattice{1, 2}, 1.0), 0.0));
}

TEST_CASE("sparse operator equals naive accumulation; linear and monotone") {
    gen::Rng r(89);
    for (int t = 0; t < 30; ++t) {
        const auto g = t % 2 ? standard(1, 5) : standard(2, 3);
        const auto s = random_family(r, g, 12);
        const auto f = gen::function(r, g->lattice());
        const double alpha = r.uniform(0.0, g->dimension() * 0.9);
        const auto tf = sparse_operator(s, f, alpha);
        const auto naive = naive_operator(s, f, alpha);
        for (std::size_t c = 0; c < f.size(); ++c) {
            CHECK(tf[c] == doctest::Approx(naive[c]).epsilon(1e-12));
            CHECK(tf[c] >= 0.0);
        }
        const double k = r.uniform(0.0, 5.0);
        const auto tk = sparse_operator(s, k * f, alpha);
        for (std::size_t c = 0; c < f.size(); ++c) CHECK(tk[c] == doctest::Approx(k * tf[c]).epsilon(1e-12));
        const auto bigger = f + gen::function(r, g->lattice());
        const auto tb = sparse_operator(s, bigger, alpha);
        for (std::size_t c = 0; c < f.size(); ++c) CHECK(tb[c] >= tf[c] * (1 - 1e-14));
    }
}

TEST_CASE("bilinear form examples and term-by-term oracle") {
    const auto g = standard(1, 4);
    const auto one = GridFunction::constant(g->lattice(), 1.0);
    ExponentTuple e{1, 1.0, kInfinity, 2.0, 2.0, 0.0};
    const std::vector<SparseFamily> fam{root_family(g)};
    CHECK(bilinear_form(fam, one, one, e) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bilinear_form(fam, one, GridFunction::constant(g->lattice(), 0.0), e) == 0.0);
    ExponentTuple bad{1, 1.0, kInfinity, 2.0, 3.0, 0.0};
    CHECK_THROWS_AS(bilinear_form(fam, one, one, bad), InadmissibleExponents);

    gen::Rng r(97);
    for (int t = 0; t < 30; ++t) {
        const auto e2 = gen::tuple(r, 1);
        std::vector<SparseFamily> fams{random_family(r, g, 6), random_family(r, g, 6)};
        const auto f = gen::function(r, g->lattice()), h = gen::function(r, g->lattice());
        double expect = 0.0;
        for (const auto& s : fams)
            for (const auto& m : s.members) {
                const std::size_t id = g->id(m.cube);
                double sf = 0.0, sh = 0.0;
                for (std::size_t c : g->cells(id)) {
                    sf += std::pow(f[c], e2.p0);
                    sh += std::pow(h[c], e2.q0_conj());
                }
                const double q = g->measure(id), cm = g->cell_measure();
                const double af = std::pow(sf * cm / q, 1.0 / e2.p0);
                const double ah = std::pow(std::pow(q, -1.0 + e2.alpha) * sh * cm, 1.0 / e2.q0_conj());
                expect += af * ah * q;
            }
        CHECK(bilinear_form(fams, f, h, e2) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("sparse pairing is dominated by the form with p0 = 1, q0 = inf") {
    gen::Rng r(101);
    for (int t = 0; t < 40; ++t) {
        const auto g = standard(1, 5);
        const auto s = random_family(r, g, 10);
        const auto f = gen::function(r, g->lattice()), h = gen::function(r, g->lattice());
        const double alpha = r.uniform(0.0, 0.45);
        const auto adm = ExponentTuple::with_derived_alpha(1, 1.0, kInfinity, 2.0, 1.0 / (0.5 - alpha));
        REQUIRE(adm.alpha == doctest::Approx(alpha).epsilon(1e-12));
        const double lhs = pairing(sparse_operator(s, f, adm.alpha), h);
        CHECK(lhs <= bilinear_form(std::vector<SparseFamily>{s}, f, h, adm) * (1 + 1e-12));
    }
}

TEST_CASE("multiplier evaluation") {
    gen::Rng r(103);
    const auto g = standard(1, 5);
    for (int t = 0; t < 20; ++t) {
        const auto s = random_family(r, g, 8);
        const auto f = gen::function(r, g->lattice());
        const double alpha = r.uniform(0.0, 0.9);
        const auto lw = Weight::lebesgue(g->lattice());
        CHECK(multiplier_eval(s, f, lw, alpha) == sparse_operator(s, f, alpha));
        const auto zero = multiplier_eval(s, GridFunction::constant(g->lattice(), 0.0), gen::weight(r, g->lattice()), alpha);
        for (double v : zero.values()) CHECK(v == 0.0);
        const auto w = gen::weight(r, g->lattice());
        const auto winv = w.pow(-1.0).function();
        const auto expect = w.function() * sparse_operator(s, winv * f, alpha);
        const auto got = multiplier_eval(s, f, w, alpha);
        for (std::size_t c = 0; c < f.size(); ++c) CHECK(got[c] == doctest::Approx(expect[c]).epsilon(1e-13));
    }
}

TEST_CASE("family CSV round trip") {
    gen::Rng r(107);
    const auto g = std::make_shared<const Grid>(GridSpec{2, 3, {2, 1}});
    const auto s = random_family(r, g, 9);
    std::ostringstream os;
    write_family_csv(os, s);
    std::istringstream is(os.str());
    const auto back = read_family_csv(is, g, s.eta);
    REQUIRE(back.members.size() == s.members.size());
    for (std::size_t i = 0; i < s.members.size(); ++i) {
        CHECK(back.members[i].cube == s.members[i].cube);
        CHECK(back.members[i].e_cells == s.members[i].e_cells);
    }
    std::istringstream junk("shift,level,index,e_cells\n0:0,9,0:0,\n");
    CHECK_THROWS(read_family_csv(junk, g, 0.5));
}
