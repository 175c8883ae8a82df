#include "doctest.h"

#include <cmath>
#include <array>
#include <map>
#include <set>

#include "ddopt/partitioner.hpp"

using namespace ddopt;

TEST_CASE("even split of 10x9 into 2x3") {
    const auto g = make_grid(10, 9, 2, 3);
    CHECK(g.row_bounds == std::vector<std::size_t>{0, 5, 10});
    CHECK(g.col_bounds == std::vector<std::size_t>{0, 3, 6, 9});
    CHECK(g.workers() == 6);
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("remainder rule gives the first blocks one extra element") {
    const auto g = make_grid(7, 5, 3, 2);
    CHECK(g.row_bounds == std::vector<std::size_t>{0, 3, 5, 7});
    CHECK(g.col_bounds == std::vector<std::size_t>{0, 3, 5});
    // column block 1 has two columns split into three sub-blocks, the last empty
    CHECK(g.sub_bounds[0] == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(g.sub_bounds[1] == std::vector<std::size_t>{0, 1, 2, 2});
    CHECK(even_bounds(11, 4) == std::vector<std::size_t>{0, 3, 6, 9, 11});
}

TEST_CASE("invalid partition counts") {
    for (auto [n, m, P, Q] : std::vector<std::array<std::size_t, 4>>{{4, 4, 5, 1}, {4, 4, 0, 1}, {4, 4, 1, 5}, {4, 4, 1, 0}}) {
        try {
            make_grid(n, m, P, Q);
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::InvalidPartitionCount);
        }
    }
}

TEST_CASE("grid sizes sum to the problem size") {
    for (std::size_t n = 1; n <= 30; n += 7)
        for (std::size_t P = 1; P <= n && P <= 6; ++P) {
            const auto g = make_grid(n, n + 3, P, 1 + P % 3);
            std::size_t rows = 0, cols = 0;
            for (std::size_t p = 0; p < g.P; ++p) rows += g.rows_in(p);
            for (std::size_t q = 0; q < g.Q; ++q) {
                cols += g.cols_in(q);
                CHECK(g.sub_bounds[q].back() == g.cols_in(q));
                CHECK(g.sub_bounds[q].size() == P + 1);
            }
            CHECK(rows == n);
            CHECK(cols == n + 3);
        }
}

TEST_CASE("single row partition gets the identity assignment") {
    const auto g = make_grid(5, 6, 1, 3);
    for (std::size_t t = 1; t <= 20; ++t) {
        const auto a = assign_subblocks(g, 9, t);
        for (std::size_t q = 0; q < 3; ++q) CHECK(a.perm[q] == std::vector<std::size_t>{0});
    }
}

TEST_CASE("assignments are reproducible and are bijections") {
    const auto g = make_grid(20, 30, 2, 3);
    for (std::size_t t = 1; t <= 50; ++t) {
        const auto a = assign_subblocks(g, 77, t);
        CHECK(a == assign_subblocks(g, 77, t));
        for (std::size_t q = 0; q < 3; ++q) {
            const auto& p = a.perm[q];
            CHECK(((p == std::vector<std::size_t>{0, 1}) || (p == std::vector<std::size_t>{1, 0})));
        }
    }
    const auto g7 = make_grid(70, 70, 7, 2);
    for (std::size_t t = 1; t <= 200; ++t) {
        const auto a = assign_subblocks(g7, 3, t);
        for (std::size_t q = 0; q < 2; ++q) {
            std::vector<int> hit(7, 0);
            for (std::size_t p = 0; p < 7; ++p) ++hit[a.subblock(p, q)];
            CHECK(hit == std::vector<int>(7, 1));
        }
    }
}

TEST_CASE("assignments differ across iterations and seeds") {
    const auto g = make_grid(50, 50, 5, 1);
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t t = 1; t <= 30; ++t) seen.insert(assign_subblocks(g, 1, t).perm[0]);
    CHECK(seen.size() > 10);
    int differ = 0;
    for (std::size_t t = 1; t <= 30; ++t) differ += assign_subblocks(g, 1, t) != assign_subblocks(g, 2, t);
    CHECK(differ > 20);
}

TEST_CASE("permutations of three partitions are uniform within 3 sigma") {
    const auto g = make_grid(30, 30, 3, 1);
    std::map<std::vector<std::size_t>, int> counts;
    const int N = 10000;
    for (int t = 1; t <= N; ++t) ++counts[assign_subblocks(g, 2024, t).perm[0]];
    CHECK(counts.size() == 6);
    const double p = 1.0 / 6.0, sd = std::sqrt(N * p * (1 - p));
    for (const auto& [perm, c] : counts) CHECK(std::abs(c - N * p) <= 3.0 * sd);
}
