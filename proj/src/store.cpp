#include "streamsift/store.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "streamsift/random.hpp"

namespace streamsift {

Strategy parse_strategy(std::string_view name) {
    if (name.size() == 1) {
        switch (name[0]) {
            case 'A': case 'a': return Strategy::A;
            case 'B': case 'b': return Strategy::B;
            case 'C': case 'c': return Strategy::C;
            case 'D': case 'd': return Strategy::D;
            case 'E': case 'e': return Strategy::E;
            default: break;
        }
    }
    throw ConfigError("unknown strategy \"" + std::string(name) + "\" (expected A-E)", "store.strategy");
}

std::string_view strategy_name(Strategy s) {
    static constexpr std::string_view names[] = {"A", "B", "C", "D", "E"};
    return names[static_cast<int>(s)];
}

void DataStore::add(LabelledExample example) {
    if (capacity && examples.size() >= *capacity)
        throw CapacityError("store is full (capacity " + std::to_string(*capacity) + ")");
    examples.push_back(std::move(example));
}

DataStore replace_policy(DataStore store, const Dataset& incoming, std::uint64_t seed) {
    if (!store.capacity) {
        store.examples.insert(store.examples.end(), incoming.begin(), incoming.end());
        return store;
    }
    const std::size_t cap = *store.capacity;
    if (incoming.size() > cap)
        throw ConfigError("incoming batch of " + std::to_string(incoming.size()) + " exceeds capacity " +
                              std::to_string(cap),
                          "store.m");
    if (store.size() > cap) throw CapacityError("store already exceeds its capacity");

    const std::size_t overflow = store.size() + incoming.size() > cap ? store.size() + incoming.size() - cap : 0;
    if (overflow > 0) {
        std::vector<std::size_t> order(store.size());
        std::iota(order.begin(), order.end(), 0);
        Rng rng = make_rng(seed, {0xe71c7});
        shuffle(order.begin(), order.end(), rng);
        std::vector<bool> evict(store.size(), false);
        for (std::size_t i = 0; i < overflow; ++i) evict[order[i]] = true;
        Dataset kept;
        kept.reserve(cap);
        for (std::size_t i = 0; i < store.size(); ++i)
            if (!evict[i]) kept.push_back(std::move(store.examples[i]));
        store.examples = std::move(kept);
    }
    store.examples.insert(store.examples.end(), incoming.begin(), incoming.end());
    return store;
}

void CostLedger::record(const CostReading& r) {
    for (double v : {r.storage, r.selection, r.training})
        if (!std::isfinite(v) || v < 0.0) throw ValidationError("cost readings must be finite and non-negative");
    steps_.push_back(r);
}

std::vector<CostReading> CostLedger::cumulative() const {
    std::vector<CostReading> out;
    out.reserve(steps_.size());
    CostReading sum;
    for (const auto& r : steps_) {
        sum.storage += r.storage;
        sum.selection += r.selection;
        sum.training += r.training;
        out.push_back(sum);
    }
    return out;
}

CostReading CostLedger::totals() const { return steps_.empty() ? CostReading{} : cumulative().back(); }

CostReading charge_step(Strategy strategy, const StepSizes& s, double tau, const CostFunctions& costs) {
    if (!(tau >= 1.0)) throw ConfigError("tau must be at least 1", "store.tau");
    switch (strategy) {
        case Strategy::A: return {0.0, 0.0, costs.train(s.arrived)};
        case Strategy::B: return {costs.store(s.stored), 0.0, costs.train(s.stored) / tau};
        case Strategy::C:
            return {costs.store(s.stored), costs.select(s.selected, s.stored) / tau, costs.train(s.selected) / tau};
        case Strategy::D:
        case Strategy::E:
            return {costs.store(s.stored), costs.select(s.selected, s.arrived), costs.train(s.stored) / tau};
    }
    throw ValidationError("unknown strategy");
}

Selector random_selector() {
    return [](const Dataset& pool, std::size_t count, std::uint64_t seed) {
        std::vector<std::size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng = make_rng(seed, {0x5e1ec7});
        shuffle(idx.begin(), idx.end(), rng);
        idx.resize(std::min(count, idx.size()));
        return idx;
    };
}

namespace {

Dataset run_selector(const Selector& selector, const Dataset& pool, std::size_t count, std::uint64_t seed) {
    const auto chosen = selector(pool, count, seed);
    if (chosen.size() != count) throw ValidationError("selector returned the wrong number of examples");
    std::vector<bool> used(pool.size(), false);
    Dataset out;
    out.reserve(count);
    for (auto i : chosen) {
        if (i >= pool.size() || used[i]) throw ValidationError("selector returned an invalid or repeated index");
        used[i] = true;
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace

StrategyRun apply_strategy(Strategy strategy, const StreamSchedule& schedule, const Selector& selector, std::size_t m,
                           std::size_t tau, const StrategyOptions& options) {
    if (tau < 1) throw ConfigError("tau must be at least 1", "store.tau");
    const bool online_selection = strategy == Strategy::D || strategy == Strategy::E;
    if ((online_selection || strategy == Strategy::C) && m == 0)
        throw ConfigError("m must be positive for strategy " + std::string(strategy_name(strategy)), "store.m");

    StrategyRun run;
    DataStore store;
    if (strategy == Strategy::E) store.capacity = m;
    Dataset offline_subset;

    for (std::size_t step = 0; step < schedule.num_steps(); ++step) {
        const Dataset& batch = schedule.steps[step];
        const std::size_t t = step + 1;
        const bool offline = t % tau == 0;
        if (online_selection && m > batch.size())
            throw ConfigError("m = " + std::to_string(m) + " exceeds the " + std::to_string(batch.size()) +
                                  " examples arriving at step " + std::to_string(t),
                              "store.m");
        const std::uint64_t select_seed = derive_seed(options.selector_seed, {step});

        StrategyStep state;
        StepSizes sizes;
        sizes.arrived = static_cast<double>(batch.size());
        switch (strategy) {
            case Strategy::A:
                state.training_set = batch;
                break;
            case Strategy::B:
                store.examples.insert(store.examples.end(), batch.begin(), batch.end());
                state.training_set = store.examples;
                break;
            case Strategy::C:
                store.examples.insert(store.examples.end(), batch.begin(), batch.end());
                if (offline || offline_subset.empty())
                    offline_subset = run_selector(selector, store.examples, std::min(m, store.size()), select_seed);
                state.training_set = offline_subset;
                sizes.selected = static_cast<double>(offline_subset.size());
                break;
            case Strategy::D:
                for (auto& e : run_selector(selector, batch, m, select_seed)) store.add(std::move(e));
                state.training_set = store.examples;
                sizes.selected = static_cast<double>(m);
                break;
            case Strategy::E:
                store = replace_policy(std::move(store), run_selector(selector, batch, m, select_seed),
                                       derive_seed(options.eviction_seed, {step}));
                state.training_set = store.examples;
                sizes.selected = static_cast<double>(m);
                break;
        }
        sizes.stored = static_cast<double>(store.size());
        run.ledger.record(charge_step(strategy, sizes, static_cast<double>(tau), options.costs));
        state.store = store;
        state.offline = offline;
        run.steps.push_back(std::move(state));
    }
    return run;
}

}  // namespace streamsift
