#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "sdlab/weight_constants.hpp"

using namespace sdlab;

using namespace oracle;

namespace {

// Every lattice with at most 12 cells that tests enumerate exhaustively.
const std::vector<CellLattice> kSmall{{1, 1}, {1, 2}, {1, 3}, {2, 1}, {3, 1}};

// sup_Q w(Q)^{-1} int_Q M(w chi_Q), every containing cube enumerated per cell.
double fujii_wilson_oracle(const Weight& w, const Grid& g) {
    double best = 0.0;
    for (std::size_t q = 0; q < g.cube_count(); ++q) {
        const auto qc = g.cells(q);
        double integral = 0.0;
        for (std::size_t x : qc) {
            double m = 0.0;
            for (std::size_t r = 0; r < g.cube_count(); ++r) {
                const auto rc = g.cells(r);
                if (!std::binary_search(rc.begin(), rc.end(), x)) continue;
                double s = 0.0;
                for (std::size_t c : rc)
                    if (std::binary_search(qc.begin(), qc.end(), c)) s += w[c];
                m = std::max(m, s / static_cast<double>(rc.size()));
            }
            integral += m;
        }
        best = std::max(best, integral / mass(w, qc));
    }
    return best;
}

Weight two_cell() { return Weight(GridFunction(CellLattice{1, 1}, {1.0, 4.0})); }

}  // namespace

TEST_CASE("constant weights give 1 for every characteristic") {
    for (const auto lat : {CellLattice{1, 4}, CellLattice{2, 2}}) {
        const auto grids = all_shifted_grids(lat);
        const auto w = Weight(GridFunction::constant(lat, 3.7));
        for (double p : {1.0, 1.5, 2.0, 5.0}) CHECK(ap_constant(w, p, grids).value == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(fujii_wilson(w, grids).value == doctest::Approx(1.0).epsilon(1e-14));
        for (double s : {1.0, 2.0, 3.0, kInfinity}) CHECK(rh_constant(w, s, grids).value == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(ar_pq_constant(w, 2.0, 2.0, 0.0, grids).value == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(ar_pq_prime(w, 2.0, 2.0, 0.0, grids).value == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(doubling_constant(w, 1.0, grids).value == doctest::Approx(1.0).epsilon(1e-14));
        for (double eta : {0.5, 0.3, 0.125})
            CHECK(doubling_constant(w, eta, grids).value == doctest::Approx(1.0 / eta).epsilon(1e-13));
    }
}

TEST_CASE("two-cell weight (1,4)") {
    const auto w = two_cell();
    const Grid g(GridSpec{1, 1, {}});
    const auto ap = ap_constant(w, 2.0, one_grid(g));
    CHECK(ap.value == doctest::Approx(25.0 / 16.0).epsilon(1e-15));
    CHECK(ap.cube->level == 0);
    const auto rh = rh_constant(w, 2.0, one_grid(g));
    CHECK(rh.value == doctest::Approx(std::sqrt(8.5) / 2.5).epsilon(1e-15));
    CHECK(rh.value == doctest::Approx(1.16619).epsilon(1e-5));
    CHECK(fujii_wilson(w, one_grid(g)).value == doctest::Approx(fujii_wilson_oracle(w, g)).epsilon(1e-14));
    CHECK(rh_constant(w, 1.0, one_grid(g)).value == 1.0);

    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        const double prime = ar_pq_prime(w, p, p, 0.0, one_grid(g)).value;
        const double ar = ar_pq_constant(w, p, p, 0.0, one_grid(g)).value;
        CHECK(ar >= prime * (1 - 1e-12));
        CHECK(ar <= p * prime * (1 + 1e-12));
    }
}

TEST_CASE("A_p is at least 1 and non-increasing in p") {
    gen::Rng r(41);
    for (int t = 0; t < 20; ++t) {
        const CellLattice lat{1 + t % 2, t % 2 ? 3 : 5};
        const auto grids = all_shifted_grids(lat);
        const auto w = gen::weight(r, lat);
        double prev = kInfinity;
        for (double p : {1.0, 1.2, 1.5, 2.0, 3.0, 6.0}) {
            const double v = ap_constant(w, p, grids).value;
            CHECK(v >= 1.0 - 1e-12);
            CHECK(v <= prev * (1 + 1e-12));
            prev = v;
        }
        double rh_prev = 1.0;
        for (double s : {1.0, 1.3, 2.0, 4.0, 10.0, kInfinity}) {
            const double v = rh_constant(w, s, grids).value;
            CHECK(v >= rh_prev * (1 - 1e-12));
            rh_prev = v;
        }
        CHECK(fujii_wilson(w, grids).value >= 1.0 - 1e-12);
    }
}

TEST_CASE("constants are invariant under w -> c w") {
    gen::Rng r(43);
    const CellLattice lat{1, 5};
    const auto grids = all_shifted_grids(lat);
    for (int t = 0; t < 10; ++t) {
        const auto w = gen::weight(r, lat);
        const double c = r.uniform(0.01, 100.0);
        const Weight cw(c * w.function());
        CHECK(ap_constant(cw, 2.0, grids).value == doctest::Approx(ap_constant(w, 2.0, grids).value).epsilon(1e-12));
        CHECK(fujii_wilson(cw, grids).value == doctest::Approx(fujii_wilson(w, grids).value).epsilon(1e-12));
        CHECK(rh_constant(cw, 3.0, grids).value == doctest::Approx(rh_constant(w, 3.0, grids).value).epsilon(1e-12));
        CHECK(ar_pq_constant(cw, 2.0, 4.0, 0.25, grids).value ==
              doctest::Approx(ar_pq_constant(w, 2.0, 4.0, 0.25, grids).value).epsilon(1e-12));
        CHECK(ar_pq_prime(cw, 2.0, 4.0, 0.25, grids).value ==
              doctest::Approx(ar_pq_prime(w, 2.0, 4.0, 0.25, grids).value).epsilon(1e-12));
        CHECK(doubling_constant(cw, 0.3, grids).value == doctest::Approx(doubling_constant(w, 0.3, grids).value).epsilon(1e-12));
    }
}

TEST_CASE("Fujii-Wilson matches the all-cubes oracle") {
    gen::Rng r(47);
    for (const auto lat : kSmall) {
        for (const Grid& g : all_shifted_grids(lat)) {
            const auto w = gen::weight(r, lat);
            CHECK(fujii_wilson(w, one_grid(g)).value == doctest::Approx(fujii_wilson_oracle(w, g)).epsilon(1e-12));
            CHECK(fujii_wilson_brute(w, one_grid(g)).value == doctest::Approx(fujii_wilson_oracle(w, g)).epsilon(1e-12));
        }
    }
}

TEST_CASE("A^R greedy equals the exhaustive subset oracle on every small grid") {
    gen::Rng r(53);
    const Weight spike(GridFunction(CellLattice{1, 2}, {1, 1, 1, 9}));
    const Grid g2(GridSpec{1, 2, {}});
    CHECK(ar_pq_constant(spike, 2.0, 2.0, 0.0, one_grid(g2)).value ==
          doctest::Approx(ar_oracle(spike, 2.0, 2.0, 0.0, g2)).epsilon(1e-12));
    CHECK(ar_pq_constant(spike, 2.0, 2.0, 0.0, one_grid(g2)).value ==
          doctest::Approx(ar_pq_brute(spike, 2.0, 2.0, 0.0, one_grid(g2)).value).epsilon(1e-12));

    for (const auto lat : kSmall) {
        for (const Grid& g : all_shifted_grids(lat)) {
            for (int t = 0; t < 4; ++t) {
                const auto w = gen::weight(r, lat);
                const double p = r.uniform(1.0, 3.0);
                const double alpha = r.coin() ? 0.0 : r.uniform(0.0, 0.5) * lat.dimension / p;
                const double q = alpha == 0.0 ? p : 1.0 / (1.0 / p - alpha / lat.dimension);
                const double greedy = ar_pq_constant(w, p, q, alpha, one_grid(g)).value;
                CHECK(greedy == doctest::Approx(ar_oracle(w, p, q, alpha, g)).epsilon(1e-12));
                CHECK(greedy == doctest::Approx(ar_pq_brute(w, p, q, alpha, one_grid(g)).value).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("A^R with p = q is the restricted A_p characteristic of w^p") {
    gen::Rng r(59);
    const CellLattice lat{1, 3};
    const Grid g(GridSpec{1, 3, {}});
    for (int t = 0; t < 10; ++t) {
        const auto w = gen::weight(r, lat);
        const double p = r.uniform(1.0, 4.0);
        // sup |E|/|Q| (w^p(Q)/w^p(E))^{1/p}
        double expect = 0.0;
        const auto wp = w.pow(p);
        for (std::size_t id = 0; id < g.cube_count(); ++id) {
            const auto cells = g.cells(id);
            for (unsigned m = 1; m < (1u << cells.size()); ++m) {
                const auto e = subset(cells, m);
                expect = std::max(expect, double(e.size()) / cells.size() * std::pow(mass(wp, cells) / mass(wp, e), 1.0 / p));
            }
        }
        CHECK(ar_pq_constant(w, p, p, 0.0, one_grid(g)).value == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("A^R parameter relation is enforced") {
    const auto w = two_cell();
    const Grid g(GridSpec{1, 1, {}});
    CHECK_THROWS(ar_pq_constant(w, 2.0, 3.0, 0.0, one_grid(g)));
    CHECK_THROWS(ar_pq_prime(w, 2.0, 3.0, 0.0, one_grid(g)));
    CHECK_THROWS(doubling_constant(w, 0.0, one_grid(g)));
    CHECK_THROWS(doubling_constant(w, 1.5, one_grid(g)));
    CHECK_THROWS(rh_constant(w, 0.5, one_grid(g)));
}

TEST_CASE("restricted weak bracket [w]' <= [w]_AR <= p [w]'") {
    gen::Rng r(61);
    for (const auto lat : {CellLattice{1, 3}, CellLattice{1, 6}, CellLattice{2, 2}}) {
        const auto grids = all_shifted_grids(lat);
        for (int t = 0; t < 12; ++t) {
            const auto w = gen::weight(r, lat);
            const double p = r.uniform(1.0, 3.0);
            const double alpha = r.coin() ? 0.0 : r.uniform(0.0, 0.5) * lat.dimension / p;
            const double q = alpha == 0.0 ? p : 1.0 / (1.0 / p - alpha / lat.dimension);
            const double ar = ar_pq_constant(w, p, q, alpha, grids).value;
            const double prime = ar_pq_prime(w, p, q, alpha, grids).value;
            CHECK(prime <= ar * (1 + 1e-12));
            CHECK(ar <= p * prime * (1 + 1e-12));
        }
    }
}

TEST_CASE("doubling greedy equals the fractional subset oracle") {
    gen::Rng r(67);
    for (const auto lat : kSmall) {
        for (const Grid& g : all_shifted_grids(lat)) {
            for (double eta : {0.5, 0.3, 0.8, 1.0 / 3.0}) {
                const auto w = gen::weight(r, lat);
                const double greedy = doubling_constant(w, eta, one_grid(g)).value;
                CHECK(greedy == doctest::Approx(doubling_oracle(w, eta, g)).epsilon(1e-12));
                CHECK(greedy == doctest::Approx(doubling_brute(w, eta, one_grid(g)).value).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("doubling bound with the corrected eta exponent") {
    // D^eta_{w^q} <= K^{q/p0} eta^{alpha q/(n q0') - q/p0}, K = A^R of w^{p0} at (p/p0, q/p0, alpha p0/q0').
    gen::Rng r(71);
    for (int t = 0; t < 40; ++t) {
        const int n = 1 + t % 2;
        const CellLattice lat{n, n == 1 ? 5 : 3};
        const auto grids = all_shifted_grids(lat);
        const auto e = gen::tuple(r, n);
        const auto w = gen::weight(r, lat, 1.0);
        const double eta = r.uniform(0.05, 1.0);
        const double k = ar_pq_constant(w.pow(e.p0), e.p / e.p0, e.q / e.p0, e.p0 * e.operator_order(), grids).value;
        const double d = doubling_constant(w.pow(e.q), eta, grids).value;
        const double bound = std::pow(k, e.q / e.p0) * std::pow(eta, e.alpha * e.q / (n * e.q0_conj()) - e.q / e.p0);
        CHECK(d <= bound * (1 + 1e-10));
    }
}

TEST_CASE("the literal positive eta exponent fails already for w = 1") {
    const CellLattice lat{1, 3};
    const auto grids = all_shifted_grids(lat);
    const auto w = Weight::lebesgue(lat);
    const double eta = 0.5, q = 2.0, p0 = 1.0;
    const double d = doubling_constant(w.pow(q), eta, grids).value;
    const double literal = std::pow(eta, q / p0);
    CHECK(d == doctest::Approx(2.0));
    CHECK(d > literal);
}

TEST_CASE("every witness reproduces its constant") {
    gen::Rng r(73);
    const CellLattice lat{2, 2};
    const auto grids = all_shifted_grids(lat);
    for (int t = 0; t < 10; ++t) {
        const auto w = gen::weight(r, lat);
        auto check = [&](const ConstantReport& rep, std::vector<double> params) {
            CHECK(reevaluate_witness(rep, w, grids, params) == doctest::Approx(rep.value).epsilon(1e-12));
            CHECK(rep.depth == lat.depth);
        };
        check(ap_constant(w, 1.0, grids), {1.0});
        check(ap_constant(w, 2.5, grids), {2.5});
        check(fujii_wilson(w, grids), {});
        check(rh_constant(w, 3.0, grids), {3.0});
        check(rh_constant(w, kInfinity, grids), {kInfinity});
        check(ar_pq_constant(w, 2.0, 4.0, 0.5, grids), {2.0, 4.0, 0.5});
        check(ar_pq_prime(w, 2.0, 4.0, 0.5, grids), {2.0, 4.0, 0.5});
        const auto d = doubling_constant(w, 0.3, grids);
        check(d, {0.3});
        const auto side_cells = static_cast<double>(std::size_t{1} << (2 * (lat.depth - d.cube->level)));
        CHECK(d.subset->cell_volume() >= 0.3 * side_cells - 1e-12);
    }
}

TEST_CASE("self-improvement probes report rows without asserting") {
    gen::Rng r(79);
    const CellLattice lat{1, 5};
    const auto grids = all_shifted_grids(lat);
    const auto w = gen::weight(r, lat, 0.5);
    const std::vector<double> cs{0.5, 1.0, 4.0};
    const auto rows = rh_self_improvement(w, 2.0, cs, grids);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(row.v > 2.0);
        CHECK(row.rh_v >= row.rh_s * (1 - 1e-12));
    }
    CHECK(ainf_self_improvement(w, cs, grids).size() == 3);
}

TEST_CASE("A^R prime agrees with the level-by-level oracle") {
    gen::Rng r(163);
    for (const auto lat : kSmall) {
        for (const Grid& g : all_shifted_grids(lat)) {
            for (int t = 0; t < 6; ++t) {
                const auto w = gen::weight(r, lat);
                const double p = t % 3 == 0 ? 1.0 : r.uniform(1.1, 4.0);
                const double alpha = t % 2 ? 0.0 : r.uniform(0.0, 0.9) * lat.dimension / p;
                const double q = alpha == 0.0 ? p : 1.0 / (1.0 / p - alpha / lat.dimension);
                CHECK(ar_pq_prime(w, p, q, alpha, one_grid(g)).value ==
                      doctest::Approx(ar_prime_oracle(w, p, q, alpha, g)).epsilon(1e-12));
            }
        }
    }
}
