#include <doctest.h>

#include <numeric>

#include "fairalloc/waterfill.hpp"
#include "fairalloc/errors.hpp"
#include "oracles.hpp"

using namespace fairalloc;
using doctest::Approx;

TEST_CASE("unit-weight water-fill caps the small demand") {
    const std::vector<double> x{2, 4, 9}, w{1, 1, 1};
    const auto r = waterfill(x, w, 9.0);
    CHECK(oracle::max_abs_diff(r.allocations, {2, 3.5, 3.5}) < 1e-12);
    REQUIRE(r.water_level);
    CHECK(*r.water_level == Approx(3.5));
    CHECK(r.binding_set == std::vector<std::size_t>{1, 2});
}

TEST_CASE("weighted water-fill splits by weight") {
    const std::vector<double> x{10, 10}, w{1, 2};
    const auto r = waterfill(x, w, 9.0);
    CHECK(oracle::max_abs_diff(r.allocations, {3, 6}) < 1e-12);
    REQUIRE(r.water_level);
    CHECK(*r.water_level == Approx(3.0));
}

TEST_CASE("zero and abundant budgets") {
    const std::vector<double> x{4, 4}, w{1, 1};
    auto r = waterfill(x, w, 0.0);
    CHECK(r.allocations == std::vector<double>{0, 0});
    r = waterfill(x, w, 100.0);
    CHECK(r.allocations == std::vector<double>{4, 4});
    CHECK_FALSE(r.water_level);
}

TEST_CASE("past allocations lower an agent's share") {
    const std::vector<double> x{5, 5}, w{1, 1}, past{4, 0};
    const auto r = waterfill_with_past(x, w, 6.0, past);
    CHECK(oracle::max_abs_diff(r.allocations, {1, 5}) < 1e-12);
    REQUIRE(r.water_level);
    CHECK(*r.water_level == Approx(5.0));
}

TEST_CASE("a large past suppresses an agent entirely") {
    const std::vector<double> x{1, 1}, w{1, 1}, past{100, 0};
    const auto r = waterfill_with_past(x, w, 1.0, past);
    CHECK(oracle::max_abs_diff(r.allocations, {0, 1}) < 1e-12);
}

TEST_CASE("zero past reduces to the plain water-fill") {
    oracle::Gen g(11);
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = g.index(1, 6);
        const auto x = g.vec(n, 0, 20), w = g.vec(n, 0.2, 3);
        const double b = g.uniform(0, 40);
        const std::vector<double> past(n, 0.0);
        CHECK(waterfill(x, w, b).allocations == waterfill_with_past(x, w, b, past).allocations);
    }
}

TEST_CASE("invalid inputs are rejected") {
    const std::vector<double> w{1, 1};
    const std::vector<double> neg{-1, 2};
    const std::vector<double> ok{1, 2};
    const std::vector<double> one{1};
    CHECK_THROWS_AS(waterfill(neg, w, 1.0), InvalidInput);
    CHECK_THROWS_AS(waterfill(ok, w, -1.0), InvalidInput);
    CHECK_THROWS_AS(waterfill(ok, one, 1.0), InvalidInput);
    const std::vector<double> zero_w{0, 1};
    CHECK_THROWS_AS(waterfill(ok, zero_w, 1.0), InvalidInput);
    CHECK_THROWS_AS(waterfill_with_past(ok, w, 1.0, neg), InvalidInput);
}

TEST_CASE("property: water-fill matches the bisection oracle") {
    oracle::Gen g(2024);
    for (int k = 0; k < 500; ++k) {
        const std::size_t n = g.index(1, 6);
        std::vector<double> x = g.vec(n, 0, 20);
        for (double& v : x)
            if (g.coin(0.15)) v = 0.0;
        const auto w = g.vec(n, 0.1, 5);
        const double b = g.uniform(0, 40);
        std::vector<double> past(n, 0.0);
        if (g.coin(0.5)) past = g.vec(n, 0, 20);
        const auto r = waterfill_with_past(x, w, b, past);
        const auto expect = oracle::waterfill(x, w, b, past);
        CHECK(oracle::max_abs_diff(r.allocations, expect) <= 1e-6);
    }
}

TEST_CASE("property: feasibility, exhaustiveness and the water level") {
    oracle::Gen g(7);
    for (int k = 0; k < 500; ++k) {
        const std::size_t n = g.index(1, 6);
        const auto x = g.vec(n, 0, 20), w = g.vec(n, 0.1, 5), past = g.vec(n, 0, 10);
        const double b = g.uniform(0, 60);
        const auto r = waterfill_with_past(x, w, b, past);
        const double total = oracle::sum(x);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(r.allocations[i] >= 0.0);
            CHECK(r.allocations[i] <= x[i] + 1e-12);
        }
        CHECK(oracle::sum(r.allocations) == Approx(std::min(b, total)).epsilon(1e-12).scale(1.0));
        if (r.water_level) {
            for (std::size_t i : r.binding_set) {
                CHECK(r.allocations[i] + past[i] == Approx(w[i] * *r.water_level).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("property: scale equivariance, weight invariance and permutation equivariance") {
    oracle::Gen g(99);
    for (int k = 0; k < 300; ++k) {
        const std::size_t n = g.index(2, 6);
        const auto x = g.vec(n, 0.5, 20), w = g.vec(n, 0.1, 5), past = g.vec(n, 0, 10);
        const double b = g.uniform(0, 40);
        const double c = g.uniform(0.1, 10);
        const auto base = waterfill_with_past(x, w, b, past).allocations;

        std::vector<double> xs(x), ps(past), ws(w);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] *= c;
            ps[i] *= c;
            ws[i] *= c;
        }
        const auto scaled = waterfill_with_past(xs, w, b * c, ps).allocations;
        for (std::size_t i = 0; i < n; ++i) CHECK(scaled[i] == Approx(base[i] * c).epsilon(1e-9).scale(1.0));
        const auto reweighted = waterfill_with_past(x, ws, b, past).allocations;
        CHECK(oracle::max_abs_diff(reweighted, base) < 1e-9);

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), g.rng);
        std::vector<double> xp(n), wp(n), pp(n);
        for (std::size_t i = 0; i < n; ++i) {
            xp[i] = x[perm[i]];
            wp[i] = w[perm[i]];
            pp[i] = past[perm[i]];
        }
        const auto permuted = waterfill_with_past(xp, wp, b, pp).allocations;
        for (std::size_t i = 0; i < n; ++i) CHECK(permuted[i] == Approx(base[perm[i]]).epsilon(1e-9).scale(1.0));
    }
}
