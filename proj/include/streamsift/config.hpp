#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "streamsift/acquisition.hpp"
#include "streamsift/store.hpp"
#include "streamsift/streams.hpp"

namespace streamsift {

using Json = nlohmann::ordered_json;

struct DatasetSpec {
    /// "synth_blobs", "csv" or "idx".
    std::string source = "synth_blobs";

    // synth_blobs
    std::size_t num_classes = 10;
    std::size_t per_class = 200;
    std::size_t dim = 8;
    double spread = 0.35;
    std::uint64_t seed = 0;

    // csv
    std::string path;
    int label_column = -1;
    bool header = false;

    // idx
    std::string images;
    std::string labels;

    /// Stratified per-class fractions held out for evaluation and for the unlabelled target pool.
    double test_fraction = 0.25;
    double target_fraction = 0.25;

    bool operator==(const DatasetSpec&) const = default;
};

struct StreamSpec {
    Nonstationarity kind = Nonstationarity::split;
    DatasetSpec dataset;
    std::size_t steps = 5;
    std::optional<std::size_t> per_step;
    bool shuffle_classes = true;
    /// Fixes the stream across run seeds when set; otherwise derived from each run seed.
    std::optional<std::uint64_t> seed;

    bool operator==(const StreamSpec&) const = default;
};

struct ModelSpec {
    /// "forest", "mlp" or "dirichlet".
    std::string kind = "forest";

    // forest
    std::size_t max_depth = 8;
    std::size_t min_leaf = 1;
    double smoothing = 1.0;
    std::size_t features_per_split = 0;
    bool bootstrap = true;

    // mlp
    std::vector<std::size_t> hidden = {128, 128, 128};
    double dropout = 0.1;

    // dirichlet; bounds default to the dataset's bounding box
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t bins_per_dim = 4;
    double alpha0 = 1.0;

    bool operator==(const ModelSpec&) const = default;
};

struct ObjectiveSpec {
    std::vector<Objective> names = {Objective::epig};
    double eta = 1.0;

    bool operator==(const ObjectiveSpec&) const = default;
};

struct StoreSpec {
    Strategy strategy = Strategy::D;
    std::size_t m = 100;
    /// Selections per step; m / steps when unset.
    std::optional<std::size_t> quota;
    std::size_t tau = 1;

    bool operator==(const StoreSpec&) const = default;
};

struct TargetSpec {
    /// "global", "seen_so_far" or "fixed".
    std::string source = "global";
    std::size_t M = 100;
    std::string path;

    bool operator==(const TargetSpec&) const = default;
};

struct SamplingSpec {
    /// Posterior samples; the model kind's default when unset.
    std::optional<std::size_t> K;

    bool operator==(const SamplingSpec&) const = default;
};

struct TrainingSpec {
    double lr = 0.01;
    std::size_t max_steps = 500;
    double weight_decay = 1e-4;
    double val_fraction = 0.1;
    /// Refit before a selection once this many examples were added since the last fit.
    std::size_t refit_every = 1;

    bool operator==(const TrainingSpec&) const = default;
};

struct RunConfig {
    StreamSpec stream;
    ModelSpec model;
    ObjectiveSpec objective;
    StoreSpec store;
    TargetSpec targets;
    SamplingSpec sampling;
    TrainingSpec training;
    std::vector<std::uint64_t> seeds = {0};
    std::string output_dir = "results";

    std::size_t quota() const { return store.quota ? *store.quota : store.m / stream.steps; }

    bool operator==(const RunConfig&) const = default;
};

/// Parses and schema-checks a config document. Unknown keys, wrong types and missing
/// required keys throw ConfigError naming the dotted path. `default_seed` fills `seeds`
/// when the document has none.
RunConfig parse_config(const Json& doc, std::optional<std::uint64_t> default_seed = std::nullopt);
RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> default_seed = std::nullopt);

/// Full document with every default filled in; parse_config(config_to_json(c)) == c.
Json config_to_json(const RunConfig& config);

/// Applies "dotted.path=<json value>" to a document. Bare words that are not valid JSON
/// are taken as strings.
void apply_override(Json& doc, const std::string& assignment);

}  // namespace streamsift
