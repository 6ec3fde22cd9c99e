#include <doctest.h>

#include "oracles.hpp"
#include "rmot/assignment.hpp"
#include "rmot/rng.hpp"

using namespace rmot;

namespace {

CostMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    CostMatrix m(static_cast<int>(rows.size()), rows.empty() ? 0 : static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m.at(i, j) = rows[i][j];
    return m;
}

} // namespace

TEST_CASE("assignment worked examples") {
    const auto a = solve_assignment(from_rows({{1, 2}, {2, 4}}));
    CHECK(a.pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
    CHECK(a.cost == 4.0);

    const auto b = solve_assignment(from_rows({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}}));
    CHECK(b.pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}, {2, 2}});
    CHECK(b.cost == 5.0);

    const auto c = solve_assignment(from_rows({{7.5}}));
    CHECK(c.pairs == std::vector<std::pair<int, int>>{{0, 0}});
    CHECK(c.cost == 7.5);
}

TEST_CASE("assignment of empty matrices") {
    CHECK(solve_assignment(CostMatrix()).pairs.empty());
    const auto r = solve_assignment(CostMatrix(3, 0));
    CHECK(r.pairs.empty());
    CHECK(r.unmatched_rows == std::vector<int>{0, 1, 2});
}

TEST_CASE("assignment rejects non-finite costs") {
    CostMatrix m(1, 1);
    m.at(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(solve_assignment(m), DomainError);
}

TEST_CASE("forbidden pairs are stripped") {
    const auto r = solve_assignment(from_rows({{5, kForbiddenCost}, {5, kForbiddenCost}}));
    CHECK(r.pairs == std::vector<std::pair<int, int>>{{0, 0}});
    CHECK(r.cost == 5.0);
    CHECK(r.unmatched_rows == std::vector<int>{1});
    CHECK(r.unmatched_cols == std::vector<int>{1});
}

TEST_CASE("ties resolve to the lexicographically smallest pair list") {
    const auto r = solve_assignment(from_rows({{1, 1}, {1, 1}}));
    CHECK(r.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});

    const auto s = solve_assignment(from_rows({{2, 1, 1}, {2, 1, 1}}));
    CHECK(s.pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
}

TEST_CASE("assignment equals brute force on random matrices") {
    SplitMix64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = rng.uniform_int(1, 6);
        const int m = rng.uniform_int(1, 6);
        CostMatrix c(n, m);
        const bool integral = trial % 2 == 0;
        for (auto& v : c.cells)
            v = integral ? static_cast<double>(rng.uniform_int(0, 12)) : rng.uniform() * 10.0;

        const auto got = solve_assignment(c);
        const auto want = oracle::brute_force_assignment(c);
        double got_total = 0;
        for (const auto& [i, j] : got.pairs) got_total += c.at(i, j);
        REQUIRE(got.pairs.size() == want.pairs.size());
        if (integral) {
            REQUIRE(got_total == want.total);
            REQUIRE(got.pairs == want.pairs); // exact arithmetic: tie-break must agree
        } else {
            REQUIRE(got_total == doctest::Approx(want.total).epsilon(1e-12));
        }
    }
}

TEST_CASE("positive scaling leaves the pair set unchanged") {
    SplitMix64 rng(43);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = rng.uniform_int(1, 6);
        const int m = rng.uniform_int(1, 6);
        CostMatrix c(n, m);
        for (auto& v : c.cells) v = static_cast<double>(rng.uniform_int(0, 15));
        const auto base = solve_assignment(c);
        for (double scale : {0.5, 2.0, 3.0, 1024.0, 1.0 / 1024.0}) {
            CostMatrix s = c;
            for (auto& v : s.cells) v *= scale;
            REQUIRE(solve_assignment(s).pairs == base.pairs);
        }
    }
}
