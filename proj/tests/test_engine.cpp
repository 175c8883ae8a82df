#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ddopt/engine.hpp"

using namespace ddopt;

TEST_CASE("tree sum of 1..4") {
    CommCounters c;
    const int s = tree_aggregate(std::vector<int>{1, 2, 3, 4}, [](int a, int b) { return a + b; }, 2, &c);
    CHECK(s == 10);
    CHECK(c.combines == 3);
    CHECK(c.scalars == 3);
}

TEST_CASE("single element aggregates to itself without communication") {
    CommCounters c;
    CHECK(tree_aggregate(std::vector<int>{7}, [](int a, int b) { return a + b; }, 2, &c) == 7);
    CHECK(c.combines == 0);
    CHECK(c.scalars == 0);
}

TEST_CASE("empty group is rejected") {
    try {
        tree_aggregate(std::vector<int>{}, [](int a, int b) { return a + b; });
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyGroup);
    }
}

TEST_CASE("tree order is fixed and left to right for every arity") {
    std::vector<std::string> leaves;
    for (char ch = 'a'; ch <= 'g'; ++ch) leaves.emplace_back(1, ch);
    const auto concat = [](std::string a, const std::string& b) { return "(" + a + b + ")"; };
    CHECK(tree_aggregate(leaves, concat, 2) == "(((ab)(cd))((ef)g))");
    CHECK(tree_aggregate(leaves, concat, 3) == "((((ab)c)((de)f))g)");
    for (std::size_t arity = 2; arity <= 8; ++arity) {
        CommCounters c;
        const auto s = tree_aggregate(leaves, [](std::string a, const std::string& b) { return a + b; }, arity, &c);
        CHECK(s == "abcdefg");
        CHECK(c.combines == leaves.size() - 1);
    }
}

TEST_CASE("vector sum of three partial blocks equals the serial sum bit-exactly") {
    std::vector<std::vector<double>> parts{{0.1, 1e16, -3.3}, {0.2, 1.0, 1e-9}, {0.3, -1e16, 7.7}};
    std::vector<double> serial(3, 0.0);
    for (const auto& p : parts)
        for (std::size_t k = 0; k < 3; ++k) serial[k] += p[k];
    ClusterSim sim(3, 1);
    const auto tree = sim.reduce_sum(parts);
    CHECK(tree == serial);
    CHECK(sim.counters().combines == 2);
    CHECK(sim.counters().scalars == 6);
}

TEST_CASE("payload is counted per tree edge") {
    ClusterSim sim(4, 1, 2);
    std::vector<std::vector<double>> g(4, std::vector<double>(5, 1.0));
    const auto s = sim.reduce_sum(g);
    CHECK(s == std::vector<double>(5, 4.0));
    CHECK(sim.counters().combines == 3);
    CHECK(sim.counters().scalars == 15);
    CHECK(sim.counters().phases == 0);
    sim.begin_phase();
    CHECK(sim.counters().phases == 1);
    sim.reset_counters();
    CHECK(sim.counters() == CommCounters{});
}

TEST_CASE("identity round returns inputs in worker order for any thread count") {
    for (int threads : {1, 2, 4, 16}) {
        ClusterSim sim(13, threads);
        const auto out = sim.run_round([](std::size_t k) { return k * 10; });
        std::vector<std::size_t> expected(13);
        for (std::size_t k = 0; k < 13; ++k) expected[k] = k * 10;
        CHECK(out == expected);
    }
}

TEST_CASE("tasks writing disjoint slices give the same output for any thread count") {
    std::vector<double> reference;
    for (int threads : {1, 4, 16}) {
        std::vector<double> shared(64, 0.0);
        ClusterSim sim(8, threads);
        sim.run_round([&](std::size_t k) {
            for (std::size_t i = 0; i < 8; ++i) shared[k * 8 + i] = std::sqrt(double(k * 8 + i));
            return 0;
        });
        if (reference.empty()) reference = shared;
        CHECK(shared == reference);
    }
}

TEST_CASE("a failing task aborts the round with the lowest failing worker id") {
    for (int threads : {1, 3}) {
        ClusterSim sim(6, threads);
        try {
            sim.run_round([](std::size_t k) {
                if (k == 4 || k == 2) throw std::runtime_error("boom " + std::to_string(k));
                return 1;
            });
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::TaskPanic);
            CHECK(e.where() == std::vector<std::int64_t>{2});
            CHECK(std::string(e.what()).find("boom 2") != std::string::npos);
        }
    }
}

TEST_CASE("cluster construction checks") {
    CHECK_THROWS_AS(ClusterSim(0, 1), Error);
    CHECK_THROWS_AS(ClusterSim(2, 1, 1), Error);
    CHECK(ClusterSim(2, 0).threads() >= 1);
}
