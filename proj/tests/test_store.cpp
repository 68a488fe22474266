#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "streamsift/random.hpp"
#include "streamsift/store.hpp"

using namespace streamsift;

namespace {

/// T steps of n examples each; example features encode (step, index) so every example is unique.
StreamSchedule uniform_schedule(std::size_t steps, std::size_t n) {
    StreamSchedule s;
    for (std::size_t t = 0; t < steps; ++t) {
        Dataset batch;
        for (std::size_t i = 0; i < n; ++i)
            batch.push_back({{static_cast<double>(t), static_cast<double>(i)}, static_cast<int>(i % 2)});
        s.steps.push_back(std::move(batch));
    }
    return s;
}

/// The table's formulas written out with t explicit, under identity cost functions.
CostReading table_formula(Strategy s, double t, double n, double m, double tau) {
    switch (s) {
        case Strategy::A: return {0, 0, n};
        case Strategy::B: return {n * t, 0, n * t / tau};
        case Strategy::C: return {n * t, n * t / tau, m / tau};
        case Strategy::D: return {m * t, n, m * t / tau};
        case Strategy::E: return {m, n, m / tau};
    }
    return {};
}

bool contains(const Dataset& haystack, const LabelledExample& needle) {
    return std::find(haystack.begin(), haystack.end(), needle) != haystack.end();
}

}  // namespace

TEST_CASE("table formulas for t = 1..100") {
    const std::size_t n = 12;
    const std::size_t m = 5;
    const auto schedule = uniform_schedule(100, n);
    for (auto s : {Strategy::A, Strategy::B, Strategy::C, Strategy::D, Strategy::E})
        for (std::size_t tau : {1, 3}) {
            CAPTURE(strategy_name(s));
            CAPTURE(tau);
            const auto run = apply_strategy(s, schedule, random_selector(), m, tau);
            REQUIRE(run.ledger.num_steps() == 100);
            for (std::size_t t = 1; t <= 100; ++t) {
                const auto expected = table_formula(s, static_cast<double>(t), n, m, static_cast<double>(tau));
                const auto& got = run.ledger.per_step()[t - 1];
                CHECK(got.storage == expected.storage);
                CHECK(got.selection == expected.selection);
                CHECK(got.training == expected.training);
            }
        }
}

TEST_CASE("table examples") {
    SUBCASE("E with m = 100 stores 100 at every step") {
        const auto run = apply_strategy(Strategy::E, uniform_schedule(20, 150), random_selector(), 100, 1);
        for (const auto& r : run.ledger.per_step()) CHECK(r.storage == 100.0);
        for (const auto& st : run.steps) CHECK(st.store.size() == 100);
    }
    SUBCASE("B with n = 50 at t = 4 stores 200") {
        const auto run = apply_strategy(Strategy::B, uniform_schedule(4, 50), random_selector(), 0, 1);
        CHECK(run.ledger.per_step()[3].storage == 200.0);
    }
    SUBCASE("A never stores or selects") {
        const auto run = apply_strategy(Strategy::A, uniform_schedule(10, 7), random_selector(), 0, 1);
        for (const auto& r : run.ledger.per_step()) {
            CHECK(r.storage == 0.0);
            CHECK(r.selection == 0.0);
        }
        for (const auto& st : run.steps) CHECK(st.store.size() == 0);
    }
}

TEST_CASE("growth classes") {
    const auto schedule = uniform_schedule(30, 10);
    auto readings = [&](Strategy s) { return apply_strategy(s, schedule, random_selector(), 4, 2).ledger.per_step(); };
    for (auto s : {Strategy::A, Strategy::E}) {
        const auto r = readings(s);
        for (const auto& x : r) {
            CHECK(x.storage == r.front().storage);
            CHECK(x.training == r.front().training);
        }
    }
    for (auto s : {Strategy::B, Strategy::C, Strategy::D}) {
        const auto r = readings(s);
        const double slope = r[1].storage - r[0].storage;
        CHECK(slope > 0);
        for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i].storage - r[i - 1].storage == slope);
    }
}

TEST_CASE("cumulative ledger is monotone") {
    const auto run = apply_strategy(Strategy::D, uniform_schedule(15, 9), random_selector(), 3, 2);
    const auto cum = run.ledger.cumulative();
    for (std::size_t i = 1; i < cum.size(); ++i) {
        CHECK(cum[i].storage >= cum[i - 1].storage);
        CHECK(cum[i].selection >= cum[i - 1].selection);
        CHECK(cum[i].training >= cum[i - 1].training);
    }
    CHECK(run.ledger.totals() == cum.back());
    CostLedger bad;
    CHECK_THROWS_AS(bad.record({-1, 0, 0}), ValidationError);
}

TEST_CASE("custom cost functions") {
    StrategyOptions opts;
    opts.costs.store = [](double n) { return 2 * n; };
    opts.costs.train = [](double n) { return n * n; };
    const auto run = apply_strategy(Strategy::B, uniform_schedule(3, 4), random_selector(), 0, 1, opts);
    CHECK(run.ledger.per_step()[2] == CostReading{24, 0, 144});
}

TEST_CASE("store contents come from the schedule and D grows by m per step") {
    const auto schedule = uniform_schedule(6, 10);
    for (auto s : {Strategy::B, Strategy::C, Strategy::D, Strategy::E}) {
        const auto run = apply_strategy(s, schedule, random_selector(), 4, 2, {{}, 3, 4});
        for (std::size_t t = 0; t < run.steps.size(); ++t) {
            for (const auto& e : run.steps[t].store.examples) {
                const auto step = static_cast<std::size_t>(e.features[0]);
                REQUIRE(step <= t);
                CHECK(contains(schedule.steps[step], e));
            }
            for (const auto& e : run.steps[t].training_set) {
                const auto step = static_cast<std::size_t>(e.features[0]);
                CHECK(step <= t);
            }
            if (s == Strategy::D) {
                CHECK(run.steps[t].store.size() == 4 * (t + 1));
                std::set<Features> unique;
                for (const auto& e : run.steps[t].store.examples) unique.insert(e.features);
                CHECK(unique.size() == run.steps[t].store.size());
            }
        }
    }
}

TEST_CASE("apply_strategy is deterministic") {
    const auto schedule = uniform_schedule(8, 10);
    const StrategyOptions opts{{}, 11, 12};
    const auto a = apply_strategy(Strategy::E, schedule, random_selector(), 6, 1, opts);
    const auto b = apply_strategy(Strategy::E, schedule, random_selector(), 6, 1, opts);
    for (std::size_t t = 0; t < a.steps.size(); ++t) CHECK(a.steps[t].store.examples == b.steps[t].store.examples);
}

TEST_CASE("apply_strategy errors") {
    const auto schedule = uniform_schedule(2, 5);
    CHECK_THROWS_AS(apply_strategy(Strategy::D, schedule, random_selector(), 6, 1), ConfigError);
    CHECK_THROWS_AS(apply_strategy(Strategy::E, schedule, random_selector(), 0, 1), ConfigError);
    CHECK_THROWS_AS(apply_strategy(Strategy::B, schedule, random_selector(), 1, 0), ConfigError);
    const Selector repeats = [](const Dataset&, std::size_t count, std::uint64_t) {
        return std::vector<std::size_t>(count, 0);
    };
    CHECK_THROWS_AS(apply_strategy(Strategy::D, schedule, repeats, 2, 1), ValidationError);
    CHECK_THROWS_AS(parse_strategy("F"), ConfigError);
    CHECK(parse_strategy("e") == Strategy::E);
}

TEST_CASE("replace_policy") {
    const LabelledExample a{{1.0}, 0}, b{{2.0}, 0}, c{{3.0}, 1};
    SUBCASE("below capacity appends") {
        DataStore s{{a}, 3};
        CHECK(replace_policy(s, {b, c}, 0).examples == Dataset{a, b, c});
    }
    SUBCASE("no capacity appends") {
        DataStore s{{a}, std::nullopt};
        CHECK(replace_policy(s, {b, c}, 0).examples == Dataset{a, b, c});
    }
    SUBCASE("capacity two evicts one resident by seed") {
        DataStore s{{a, b}, 2};
        std::set<double> survivors;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const auto out = replace_policy(s, {c}, seed);
            REQUIRE(out.size() == 2);
            CHECK(out.examples[1] == c);
            CHECK((out.examples[0] == a || out.examples[0] == b));
            CHECK(replace_policy(s, {c}, seed).examples == out.examples);
            survivors.insert(out.examples[0].features[0]);
        }
        CHECK(survivors.size() == 2);
    }
    SUBCASE("oversized incoming batch") {
        DataStore s{{}, 1};
        CHECK_THROWS_AS(replace_policy(s, {a, b}, 0), ConfigError);
    }
    SUBCASE("add respects capacity") {
        DataStore s{{a}, 1};
        CHECK_THROWS_AS(s.add(b), CapacityError);
    }
}

TEST_CASE("replace_policy fuzz") {
    Rng rng = make_rng(99);
    DataStore store{{}, 17};
    std::set<double> issued;
    double next = 0;
    for (int op = 0; op < 1000; ++op) {
        const std::size_t k = uniform_index(rng, 18);
        Dataset incoming;
        for (std::size_t i = 0; i < k; ++i) {
            incoming.push_back({{next}, 0});
            issued.insert(next++);
        }
        const std::size_t before = store.size();
        store = replace_policy(std::move(store), incoming, rng());
        CHECK(store.size() <= 17);
        CHECK(store.size() == std::min<std::size_t>(17, before + k));
        for (const auto& e : incoming) CHECK(contains(store.examples, e));
        for (const auto& e : store.examples) CHECK(issued.count(e.features[0]) == 1);
    }
}
