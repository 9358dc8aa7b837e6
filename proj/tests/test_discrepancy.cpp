#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "qmcerr/discrepancy.hpp"
#include "qmcerr/oracle.hpp"
#include "qmcerr/pointsets.hpp"
#include "test_util.hpp"

using namespace qmcerr;

namespace {

double midpoint_rule_value(int n, double q) { return 1.0 / (2.0 * std::pow(q + 1.0, 1.0 / q) * n); }

// dense dyadic scan with both one-sided counts, for cross-checking sup norms
double linf_dense_scan(const PointSet& ps, int resolution) {
    const int d = ps.dim();
    const int n = ps.size();
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> t(static_cast<std::size_t>(d));
    double sup = 0.0;
    while (true) {
        for (int a = 0; a < d; ++a) t[static_cast<std::size_t>(a)] = static_cast<double>(idx[static_cast<std::size_t>(a)]) / resolution;
        double vol = 1.0;
        for (double c : t) vol *= c;
        int strict = 0, leq = 0;
        for (int j = 0; j < n; ++j) {
            bool s = true, l = true;
            for (int a = 0; a < d; ++a) {
                s = s && ps.coord(j, a) < t[static_cast<std::size_t>(a)];
                l = l && ps.coord(j, a) <= t[static_cast<std::size_t>(a)];
            }
            strict += s;
            leq += l;
        }
        sup = std::max({sup, std::abs(static_cast<double>(strict) / n - vol),
                        std::abs(static_cast<double>(leq) / n - vol)});
        int a = 0;
        for (; a < d; ++a) {
            if (++idx[static_cast<std::size_t>(a)] <= resolution) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
        if (a == d) break;
    }
    return sup;
}

}  // namespace

TEST_CASE("local discrepancy") {
    const PointSet half = PointSet::from_1d({0.5});
    const double t1[1] = {0.5};
    CHECK(local_discrepancy(half, t1) == -0.5);
    const double t2[1] = {0.75};
    CHECK(local_discrepancy(half, t2) == 0.25);

    const PointSet origin = PointSet::from_rows({{0.0, 0.0}});
    const double t3[2] = {1.0, 1.0};
    CHECK(local_discrepancy(origin, t3) == 0.0);

    const double bad[1] = {1.5};
    CHECK_THROWS_AS(local_discrepancy(half, bad), std::invalid_argument);
}

TEST_CASE("L2 closed form") {
    for (int n : {1, 2, 5, 16, 64})
        CHECK(l2_discrepancy(midpoint_1d(n)) ==
              doctest::Approx(1.0 / (2.0 * std::sqrt(3.0) * n)).epsilon(1e-13));

    CHECK(l2_discrepancy(PointSet::from_1d({0.5})) == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-14));

    // one point at the origin: the squared norm is 11/18 by direct integration
    const PointSet origin = PointSet::from_rows({{0.0, 0.0}});
    const double v = l2_discrepancy(origin);
    CHECK(v * v == doctest::Approx(11.0 / 18.0).epsilon(1e-14));
    CHECK(v == doctest::Approx(discrepancy_quadrature_oracle(origin, PStar::finite(2), 2048)).epsilon(1e-5));
}

TEST_CASE("sup norm") {
    for (int n : {1, 2, 3, 8, 33})
        CHECK(linf_discrepancy(midpoint_1d(n)) == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-13));

    CHECK(linf_discrepancy(PointSet::from_1d({0.5})) == 0.5);

    const PointSet h = hammersley_2d(2, std::vector<int>{0, 0});
    CHECK(linf_discrepancy(h) == doctest::Approx(linf_dense_scan(h, 64)).epsilon(1e-12));

    // a node exactly at 1 never counts
    const PointSet edge = PointSet::from_1d({1.0});
    CHECK(linf_discrepancy(edge) == 1.0);
}

TEST_CASE("Lp norm exact 1D path") {
    for (int n : {1, 2, 3, 8}) {
        for (double q : {1.0, 2.0, 3.0, 5.0}) {
            const auto r = lp_discrepancy(midpoint_1d(n), PStar::finite(q));
            CHECK(r.tolerance == 0.0);
            CHECK(r.value == doctest::Approx(midpoint_rule_value(n, q)).epsilon(1e-13));
        }
    }
    const auto single = lp_discrepancy(PointSet::from_1d({0.5}), PStar::finite(1));
    CHECK(single.value == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("Lp norm matches the exact L2 identity in 2D") {
    const PointSet h = hammersley_2d(3, balanced_sigma(3));
    const auto r = lp_discrepancy(h, PStar::finite(2));
    CHECK(r.value == doctest::Approx(l2_discrepancy(h)).epsilon(1e-10));
}

TEST_CASE("Lp norm quadrature path agrees with the midpoint-rule oracle") {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 3; ++trial) {
        const PointSet ps = testutil::random_points(gen, 2, 4 + static_cast<int>(gen() % 5));
        for (double q : {1.5, 3.0}) {
            const auto r = lp_discrepancy(ps, PStar::finite(q), 1e-9);
            const double oracle = discrepancy_quadrature_oracle(ps, PStar::finite(q), 1024);
            CHECK(r.value == doctest::Approx(oracle).epsilon(2e-3));
        }
    }
}

TEST_CASE("Lp norm is nondecreasing in the exponent") {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 5; ++trial) {
        const int d = 1 + static_cast<int>(gen() % 2);
        const PointSet ps = testutil::random_points(gen, d, 2 + static_cast<int>(gen() % 10));
        double prev = 0.0;
        for (double q : {1.0, 2.0, 3.0}) {
            const auto r = lp_discrepancy(ps, PStar::finite(q), 1e-9);
            CHECK(r.value >= prev - r.tolerance - 1e-9);
            prev = r.value;
        }
        CHECK(linf_discrepancy(ps) >= prev - 1e-9);
    }
}

TEST_CASE("weighted discrepancy reductions") {
    std::mt19937_64 gen(41);
    const PointSet ps1 = testutil::random_points(gen, 1, 6);
    const Weights w1 = Weights::single(1, SubsetId(0b1), 0.7);
    const auto wd = weighted_lp_discrepancy(ps1, w1, PStar::finite(3));
    const auto plain = lp_discrepancy(ps1, PStar::finite(3));
    CHECK(wd.value == doctest::Approx(0.7 * plain.value).epsilon(1e-12));

    // only the empty set weighted: nothing contributes
    const Weights none(2);
    const PointSet ps2 = testutil::random_points(gen, 2, 4);
    CHECK(weighted_lp_discrepancy(ps2, none, PStar::finite(2)).value == 0.0);
    CHECK(weighted_lp_discrepancy(ps2, none, PStar::infinity()).value == 0.0);

    // single full-dimension weight picks out the plain norm
    const Weights full = Weights::single(2, SubsetId(0b11), 1.0);
    CHECK(weighted_lp_discrepancy(ps2, full, PStar::finite(2)).value ==
          doctest::Approx(l2_discrepancy(ps2)).epsilon(1e-12));

    // single positive weight on a random subset
    const PointSet ps3 = testutil::random_points(gen, 3, 5);
    const SubsetId u(0b101);
    const Weights wu = Weights::single(3, u, 1.3);
    const auto lhs = weighted_lp_discrepancy(ps3, wu, PStar::finite(2));
    CHECK(lhs.value == doctest::Approx(1.3 * l2_discrepancy(project(ps3, u))).epsilon(1e-12));

    CHECK_THROWS_AS(weighted_lp_discrepancy(ps1, none, PStar::finite(2)), std::invalid_argument);
}

TEST_CASE("weighted discrepancy scales linearly in the weights") {
    std::mt19937_64 gen(51);
    for (const bool infinite : {false, true}) {
        const int d = 2;
        const PointSet ps = testutil::random_points(gen, d, 6);
        const Weights w = testutil::random_weights(gen, d);
        Weights scaled(d);
        const double c = 3.75;
        for (std::uint32_t m = 1; m < w.subset_count(); ++m)
            scaled.set_gamma(SubsetId(m), c * w.gamma(SubsetId(m)));
        const PStar p = infinite ? PStar::infinity() : PStar::finite(2);
        const auto base = weighted_lp_discrepancy(ps, w, p);
        const auto big = weighted_lp_discrepancy(ps, scaled, p);
        CHECK(big.value == doctest::Approx(c * base.value).epsilon(1e-12));
    }
}

TEST_CASE("reflected-set error") {
    // the midpoint set is symmetric under reflection
    const PointSet mp = midpoint_1d(5);
    const PointSet refl = reflect(mp);
    std::vector<double> a(mp.flat().begin(), mp.flat().end());
    std::vector<double> b(refl.flat().begin(), refl.flat().end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));

    const Weights w1 = Weights::single(1, SubsetId(0b1), 1.0);
    CHECK(anchored_wce(mp, w1, PStar::finite(2)).value ==
          doctest::Approx(weighted_lp_discrepancy(mp, w1, PStar::finite(2)).value).epsilon(1e-13));

    const PointSet quarter = PointSet::from_1d({0.25});
    CHECK(anchored_wce(quarter, w1, PStar::infinity()).value == doctest::Approx(0.75).epsilon(1e-15));

    const PointSet origin = PointSet::from_rows({{0.0, 0.0}});
    const Weights w2 = Weights::single(2, SubsetId(0b11), 1.0);
    const PointSet ones = PointSet::from_rows({{1.0, 1.0}});
    CHECK(anchored_wce(origin, w2, PStar::finite(2)).value ==
          doctest::Approx(weighted_lp_discrepancy(ones, w2, PStar::finite(2)).value).epsilon(1e-14));
}

TEST_CASE("cell grid") {
    const PointSet ps = PointSet::from_rows({{0.5, 0.25}, {0.5, 0.75}});
    const CellGrid grid = CellGrid::from(ps);
    REQUIRE(grid.dim() == 2);
    CHECK(grid.breaks[0] == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(grid.breaks[1] == std::vector<double>{0.0, 0.25, 0.75, 1.0});
    CHECK(grid.cell_count() == 6);
    CHECK(grid.vertex_count() == 12);
}

TEST_CASE("quadrature budget exhaustion is reported") {
    std::mt19937_64 gen(61);
    const PointSet ps = testutil::random_points(gen, 2, 12);
    QuadratureLimits limits;
    limits.cell_budget = 3;
    CHECK_THROWS_AS(lp_discrepancy(ps, PStar::finite(1.5), 1e-10, limits), QuadratureBudgetError);
}
