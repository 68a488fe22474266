#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "streamsift/errors.hpp"
#include "streamsift/example.hpp"
#include "streamsift/streams.hpp"

namespace streamsift {

/// The five stream-learning regimes, from online learning (A) to a fixed-size
/// store with replacement (E).
enum class Strategy { A, B, C, D, E };

Strategy parse_strategy(std::string_view name);
std::string_view strategy_name(Strategy s);

class CapacityError : public Error {
public:
    using Error::Error;
};

struct DataStore {
    Dataset examples;
    std::optional<std::size_t> capacity;

    std::size_t size() const noexcept { return examples.size(); }
    /// Throws CapacityError when the store is full.
    void add(LabelledExample example);
};

/// Inserts `incoming`, then evicts seeded-uniform residents (never incoming examples)
/// until the store is back at capacity. Without a capacity this is a plain append.
DataStore replace_policy(DataStore store, const Dataset& incoming, std::uint64_t seed);

/// Abstract cost functions; identities by default, with C_select(M, N) = N.
struct CostFunctions {
    std::function<double(double)> store = [](double n) { return n; };
    std::function<double(double, double)> select = [](double, double n) { return n; };
    std::function<double(double)> train = [](double n) { return n; };
};

struct CostReading {
    double storage = 0.0;
    double selection = 0.0;
    double training = 0.0;

    bool operator==(const CostReading&) const = default;
};

class CostLedger {
public:
    /// Throws ValidationError on negative or non-finite readings.
    void record(const CostReading& reading);

    const std::vector<CostReading>& per_step() const noexcept { return steps_; }
    /// Running sums after each step.
    std::vector<CostReading> cumulative() const;
    CostReading totals() const;
    std::size_t num_steps() const noexcept { return steps_.size(); }

private:
    std::vector<CostReading> steps_;
};

/// Per-step sizes feeding the cost formulas.
struct StepSizes {
    double arrived = 0;  ///< n: examples arriving this step
    double selected = 0; ///< m: examples selected (online or offline)
    double stored = 0;   ///< examples held in the store after this step
};

/// The amortized per-step reading of each strategy: offline actions are divided by tau.
CostReading charge_step(Strategy strategy, const StepSizes& sizes, double tau, const CostFunctions& costs = {});

/// Chooses `count` distinct indices of `pool`.
using Selector = std::function<std::vector<std::size_t>(const Dataset& pool, std::size_t count, std::uint64_t seed)>;

/// Seeded uniform selection without replacement.
Selector random_selector();

struct StrategyOptions {
    CostFunctions costs;
    std::uint64_t selector_seed = 0;
    std::uint64_t eviction_seed = 0;
};

struct StrategyStep {
    DataStore store;
    /// Examples the model trains on after this step.
    Dataset training_set;
    /// True when the offline actions ran at this step (t divisible by tau).
    bool offline = false;
};

struct StrategyRun {
    std::vector<StrategyStep> steps;
    CostLedger ledger;
};

/// Replays `schedule` under `strategy`. m is the per-step online selection size for D and E,
/// the offline subset size for C, and the store capacity for E.
StrategyRun apply_strategy(Strategy strategy, const StreamSchedule& schedule, const Selector& selector, std::size_t m,
                           std::size_t tau, const StrategyOptions& options = {});

}  // namespace streamsift
