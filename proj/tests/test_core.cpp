#include <doctest.h>

#include "fairalloc/core.hpp"

using namespace fairalloc;

TEST_CASE("instance validation") {
    CHECK_NOTHROW(Instance::uniform(2, 3, 5.0).validate());
    CHECK_THROWS_AS(Instance::uniform(0, 3, 5.0).validate(), InvalidInput);
    CHECK_THROWS_AS(Instance::uniform(2, 0, 5.0).validate(), InvalidInput);
    CHECK_THROWS_AS(Instance::uniform(2, 3, -1.0).validate(), InvalidInput);
    Instance bad = Instance::uniform(2, 3, 5.0);
    bad.weights[1] = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    bad = Instance::uniform(2, 3, 5.0, 0.0);
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("tables reject ragged rows") {
    CHECK_THROWS_AS(DemandMatrix::from_rows({{1, 2}, {3}}), InvalidInput);
    const auto d = DemandMatrix::from_rows({{1, 2}, {3, 4}});
    CHECK(d.column_sum(1) == 6.0);
    CHECK(d.total() == 10.0);
}

TEST_CASE("total utility caps each step at the demand") {
    SUBCASE("under demand") {
        const auto a = AllocationMatrix::from_rows({{3}, {0}});
        const auto x = DemandMatrix::from_rows({{4}, {0}});
        CHECK(total_utility(a, x, 0) == 3.0);
    }
    SUBCASE("over demand") {
        const auto a = AllocationMatrix::from_rows({{5}, {5}});
        const auto x = DemandMatrix::from_rows({{4}, {4}});
        CHECK(total_utility(a, x, 0) == 8.0);
    }
    SUBCASE("mixed") {
        const auto a = AllocationMatrix::from_rows({{2}, {3.5}});
        const auto x = DemandMatrix::from_rows({{2}, {4}});
        CHECK(total_utility(a, x, 0) == 5.5);
    }
    SUBCASE("shape mismatch") {
        const auto a = AllocationMatrix::from_rows({{2, 1}});
        const auto x = DemandMatrix::from_rows({{2}});
        CHECK_THROWS_AS(total_utility(a, x, 0), InvalidInput);
    }
}

TEST_CASE("demand and allocation validation") {
    CHECK_THROWS_AS(validate_demands(DemandMatrix::from_rows({{1, -1}})), InvalidInput);
    CHECK_THROWS_AS(validate_demands(DemandMatrix::from_rows({{1, 0}, {2, 0}})), InvalidInput);
    CHECK_NOTHROW(validate_demands(DemandMatrix::from_rows({{1, 0}, {0, 2}})));
    CHECK_THROWS_AS(validate_allocations(AllocationMatrix::from_rows({{3, 3}}), 5.0), FeasibilityError);
    CHECK_THROWS_AS(validate_allocations(AllocationMatrix::from_rows({{-1, 3}}), 5.0), FeasibilityError);
    CHECK_NOTHROW(validate_allocations(AllocationMatrix::from_rows({{2, 3}}), 5.0));
}

TEST_CASE("episode state follows the budget recursion") {
    const Instance inst = Instance::uniform(2, 3, 10.0);
    const EpisodeState s0 = EpisodeState::initial(inst);
    CHECK(s0.step() == 0);
    CHECK(s0.remaining_budget() == 10.0);

    const std::vector<double> a{1.0, 3.0};
    const std::vector<double> x{2.0, 3.0};
    const EpisodeState s1 = s0.advance(a, x);
    CHECK(s1.step() == 1);
    CHECK(s1.remaining_budget() == doctest::Approx(6.0));
    CHECK(s1.cumulative_allocations()[1] == 3.0);
    CHECK(s1.cumulative_demands()[0] == 2.0);

    const std::vector<double> zero{0.0, 0.0};
    const EpisodeState s2 = s1.advance(zero, zero);
    CHECK(s2.step() == 2);
    CHECK(s2.remaining_budget() == s1.remaining_budget());

    const std::vector<double> over{3.0, 3.1};
    CHECK_THROWS_AS(s2.advance(over, x), FeasibilityError);
}

TEST_CASE("advance accepts an overshoot within tolerance and clamps to zero") {
    const Instance inst = Instance::uniform(1, 2, 5.0);
    const std::vector<double> a{5.000000001};
    const std::vector<double> x{6.0};
    const EpisodeState s = EpisodeState::initial(inst).advance(a, x);
    CHECK(s.remaining_budget() == 0.0);
}
