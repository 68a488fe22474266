#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "streamsift/acquisition.hpp"
#include "streamsift/config.hpp"
#include "streamsift/model.hpp"
#include "streamsift/store.hpp"

namespace streamsift {

Dataset load_dataset(const DatasetSpec& spec);

struct DataSplit {
    Dataset stream;
    Dataset test;
    Dataset target_pool;
};

/// Stratified per-class split; within each part examples keep their dataset order.
DataSplit split_dataset(const Dataset& data, double test_fraction, double target_fraction, std::uint64_t seed);

/// The split and schedule run_experiment uses for `seed` (or the config's fixed stream seed).
DataSplit experiment_split(const RunConfig& config, const Dataset& data, std::uint64_t seed);
StreamSchedule experiment_schedule(const RunConfig& config, const Dataset& stream, std::uint64_t seed);

/// Builds an unfitted model from the config. `data` fixes the input dimension and, for
/// histogram models without explicit bounds, the bounding box.
std::unique_ptr<Model> make_model(const RunConfig& config, std::size_t num_classes, const Dataset& data,
                                  std::uint64_t seed);

/// Fraction of argmax-correct predictions; argmax ties go to the lowest class.
double evaluate_accuracy(const Model& model, std::span<const LabelledExample> eval_set);

/// Inputs a target set may be drawn from at the current step.
struct TargetSources {
    std::span<const LabelledExample> global_pool;
    /// Everything that has arrived on the stream so far, current step included.
    std::span<const LabelledExample> seen_so_far;
    std::span<const Features> fixed;
};

/// M draws without replacement from the source named by `spec`, or the fixed inputs in order.
TargetSet build_target_set(const TargetSpec& spec, const TargetSources& sources, std::uint64_t seed);

struct SelectionRecord {
    std::size_t step = 0;
    std::size_t slot = 0;
    /// Position in the step's batch.
    std::size_t candidate = 0;
    /// Row of the stream split the example came from.
    std::size_t source_index = 0;
    /// Chosen by a seeded uniform draw because the store was still empty.
    bool warm_start = false;
    double score = 0.0;
    double score_min = 0.0;
    double score_max = 0.0;
    double score_mean = 0.0;
    std::size_t num_candidates = 0;
    std::size_t num_degenerate = 0;
    std::size_t target_evaluations = 0;
    std::size_t candidate_evaluations = 0;
};

struct PhaseTiming {
    double fit_seconds = 0.0;
    double score_seconds = 0.0;
    double evaluate_seconds = 0.0;
};

struct SeedRun {
    Objective objective = Objective::random;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    /// Test accuracy after each step.
    std::vector<double> accuracy;
    /// Stream-split rows held in the store after each step.
    std::vector<std::vector<std::size_t>> store_sources;
    /// Per-class counts of the store after each step.
    std::vector<std::vector<std::size_t>> store_class_counts;
    std::vector<SelectionRecord> selections;
    CostLedger ledger;
    PhaseTiming timing;
};

struct ExperimentResult {
    RunConfig config;
    std::size_t num_classes = 0;
    /// One entry per (objective, seed), objectives outermost.
    std::vector<SeedRun> runs;
    double total_seconds = 0.0;

    std::size_t failed_count() const;
};

struct ExperimentOptions {
    std::size_t workers = 1;
    /// Called with a short progress line after each (objective, seed) run.
    std::function<void(const std::string&)> progress;
};

/// Strategy D with quota selections per step: before each selection the model is refit on
/// the store and the step's remaining candidates are scored; after each step the model is
/// refit on the whole store and evaluated on the test split.
ExperimentResult run_experiment(const RunConfig& config, const ExperimentOptions& options = {});

struct CurveSummary {
    Objective objective = Objective::random;
    std::size_t seeds_ok = 0;
    std::vector<std::uint64_t> failed_seeds;
    std::vector<double> mean;
    /// Standard error of the mean across successful seeds (0 with fewer than two).
    std::vector<double> standard_error;
};

std::vector<CurveSummary> summarize(const ExperimentResult& result);

/// The results document. Wall-clock fields live under "timing" keys only.
Json result_to_json(const ExperimentResult& result);
/// Copy of a results document with every "timing" key removed.
Json strip_timing(Json doc);

std::string accuracy_csv(const ExperimentResult& result);
std::string learning_curve_svg(const ExperimentResult& result);

/// Writes results.json, accuracy.csv and learning_curve.svg into `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace streamsift
