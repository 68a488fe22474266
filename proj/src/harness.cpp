#include "streamsift/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "streamsift/bootstrap_forest.hpp"
#include "streamsift/dirichlet_histogram.hpp"
#include "streamsift/dropout_mlp.hpp"
#include "streamsift/io.hpp"
#include "streamsift/random.hpp"
#include "streamsift/streams.hpp"

namespace streamsift {

namespace {

// Tags separating the random streams used within one run.
enum SeedTag : std::uint64_t { kSplit = 1, kStream, kModel, kAux, kWarm, kScore, kTargets };

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

Dataset load_dataset(const DatasetSpec& spec) {
    if (spec.source == "synth_blobs")
        return synth_blobs(spec.num_classes, spec.per_class, spec.dim, spec.spread, spec.seed);
    if (spec.source == "csv") {
        CsvOptions opts;
        opts.label_column = spec.label_column;
        opts.header = spec.header;
        return load_csv(spec.path, opts);
    }
    if (spec.source == "idx") return load_idx(spec.images, spec.labels);
    throw ConfigError("unknown dataset source \"" + spec.source + "\"", "stream.dataset.source");
}

DataSplit split_dataset(const Dataset& data, double test_fraction, double target_fraction, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < data.size(); ++i) by_class[data[i].label].push_back(i);

    enum Part : unsigned char { kStreamPart, kTestPart, kTargetPart };
    std::vector<Part> part(data.size(), kStreamPart);
    for (auto& [label, rows] : by_class) {
        Rng rng = make_rng(seed, {static_cast<std::uint64_t>(label)});
        shuffle(rows.begin(), rows.end(), rng);
        const auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(rows.size())));
        const auto n_target = static_cast<std::size_t>(std::floor(target_fraction * static_cast<double>(rows.size())));
        for (std::size_t i = 0; i < rows.size(); ++i)
            part[rows[i]] = i < n_test ? kTestPart : i < n_test + n_target ? kTargetPart : kStreamPart;
    }
    DataSplit out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        switch (part[i]) {
            case kStreamPart: out.stream.push_back(data[i]); break;
            case kTestPart: out.test.push_back(data[i]); break;
            case kTargetPart: out.target_pool.push_back(data[i]); break;
        }
    }
    return out;
}

std::unique_ptr<Model> make_model(const RunConfig& config, std::size_t num_classes, const Dataset& data,
                                  std::uint64_t seed) {
    const ModelSpec& m = config.model;
    if (m.kind == "forest") {
        ForestConfig f;
        f.num_classes = num_classes;
        f.num_trees = config.sampling.K.value_or(f.num_trees);
        f.max_depth = m.max_depth;
        f.min_leaf = m.min_leaf;
        f.smoothing = m.smoothing;
        f.features_per_split = m.features_per_split;
        f.bootstrap = m.bootstrap;
        f.seed = seed;
        return std::make_unique<BootstrapForest>(f);
    }
    if (m.kind == "mlp") {
        MlpConfig c;
        c.num_classes = num_classes;
        c.hidden = m.hidden;
        c.dropout = m.dropout;
        c.learning_rate = config.training.lr;
        c.weight_decay = config.training.weight_decay;
        c.max_steps = config.training.max_steps;
        c.val_fraction = config.training.val_fraction;
        c.num_samples = config.sampling.K.value_or(c.num_samples);
        c.seed = seed;
        return std::make_unique<DropoutMLP>(c);
    }
    if (m.kind == "dirichlet") {
        DirichletHistogramConfig h;
        h.num_classes = num_classes;
        h.bins_per_dim = m.bins_per_dim;
        h.alpha0 = m.alpha0;
        h.num_samples = config.sampling.K.value_or(h.num_samples);
        h.seed = seed;
        if (data.empty()) throw ConfigError("cannot size a histogram model without data", "model.kind");
        const std::size_t dim = data.front().features.size();
        if (m.lower.empty()) {
            h.lower.assign(dim, std::numeric_limits<double>::infinity());
            h.upper.assign(dim, -std::numeric_limits<double>::infinity());
            for (const auto& e : data)
                for (std::size_t d = 0; d < dim; ++d) {
                    h.lower[d] = std::min(h.lower[d], e.features[d]);
                    h.upper[d] = std::max(h.upper[d], e.features[d]);
                }
            for (std::size_t d = 0; d < dim; ++d)
                if (h.upper[d] <= h.lower[d]) h.upper[d] = h.lower[d] + 1.0;
        } else {
            if (m.lower.size() != dim)
                throw ConfigError("bounds have " + std::to_string(m.lower.size()) + " entries but the data has " +
                                      std::to_string(dim) + " features",
                                  "model.hyperparameters.lower");
            h.lower = m.lower;
            h.upper = m.upper;
        }
        return std::make_unique<DirichletHistogramClassifier>(h);
    }
    throw ConfigError("unknown model kind \"" + m.kind + "\"", "model.kind");
}

double evaluate_accuracy(const Model& model, std::span<const LabelledExample> eval_set) {
    if (eval_set.empty()) throw ValidationError("evaluate_accuracy: empty evaluation set");
    std::size_t correct = 0;
    for (const auto& e : eval_set)
        correct += static_cast<int>(predict_label(model, e.features)) == e.label;
    return static_cast<double>(correct) / static_cast<double>(eval_set.size());
}

TargetSet build_target_set(const TargetSpec& spec, const TargetSources& sources, std::uint64_t seed) {
    if (spec.source == "fixed") {
        if (sources.fixed.empty()) throw ConfigError("fixed target file has no inputs", "targets.path");
        return TargetSet{std::vector<Features>(sources.fixed.begin(), sources.fixed.end())};
    }
    std::span<const LabelledExample> pool;
    if (spec.source == "global") {
        pool = sources.global_pool;
    } else if (spec.source == "seen_so_far") {
        pool = sources.seen_so_far;
    } else {
        throw ConfigError("unknown target source \"" + spec.source + "\"", "targets.source");
    }
    if (spec.M > pool.size())
        throw ConfigError("M = " + std::to_string(spec.M) + " exceeds the " + std::to_string(pool.size()) +
                              " inputs available to the \"" + spec.source + "\" target source",
                          "targets.M");
    std::vector<std::size_t> rows(pool.size());
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng = make_rng(seed, {kTargets});
    // Partial Fisher-Yates: the first M positions are a uniform draw without replacement.
    for (std::size_t i = 0; i < spec.M; ++i) std::swap(rows[i], rows[i + uniform_index(rng, rows.size() - i)]);
    TargetSet targets;
    targets.inputs.reserve(spec.M);
    for (std::size_t i = 0; i < spec.M; ++i) targets.inputs.push_back(pool[rows[i]].features);
    return targets;
}

StreamSchedule experiment_schedule(const RunConfig& c, const Dataset& stream, std::uint64_t seed) {
    seed = derive_seed(c.stream.seed.value_or(seed), {kStream});
    StreamOptions opts;
    opts.per_step = c.stream.per_step;
    opts.shuffle_classes = c.stream.shuffle_classes;
    switch (c.stream.kind) {
        case Nonstationarity::split: return split_stream(stream, c.stream.steps, seed, opts);
        case Nonstationarity::permuted: return permuted_stream(stream, c.stream.steps, seed, opts);
        case Nonstationarity::stationary: return stationary_stream(stream, c.stream.steps, seed, opts);
    }
    throw ConfigError("unknown stream kind", "stream.kind");
}

DataSplit experiment_split(const RunConfig& c, const Dataset& data, std::uint64_t seed) {
    return split_dataset(data, c.stream.dataset.test_fraction, c.stream.dataset.target_fraction,
                         derive_seed(c.stream.seed.value_or(seed), {kSplit}));
}

std::size_t ExperimentResult::failed_count() const {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const SeedRun& r) { return r.failed; }));
}

namespace {

struct RunInputs {
    const RunConfig& config;
    const Dataset& data;
    std::size_t num_classes;
    const std::vector<Features>& fixed_targets;
    std::size_t workers;
};

void summarize_scores(const ScoreReport& report, SelectionRecord& rec) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    std::size_t finite = 0;
    for (double v : report.values) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        ++finite;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.score_min = finite ? lo : nan;
    rec.score_max = finite ? hi : nan;
    rec.score_mean = finite ? sum / static_cast<double>(finite) : nan;
    rec.num_candidates = report.values.size();
    rec.num_degenerate = report.degenerate.size();
    rec.target_evaluations = report.target_evaluations;
    rec.candidate_evaluations = report.candidate_evaluations;
}

/// Body of one (objective, seed) run. Model failures propagate to the caller.
void run_seed(const RunInputs& in, SeedRun& run) {
    const RunConfig& c = in.config;
    const std::uint64_t seed = run.seed;
    const DataSplit split = experiment_split(c, in.data, seed);
    if (split.test.empty())
        throw ConfigError("the test split is empty; raise test_fraction", "stream.dataset.test_fraction");
    const StreamSchedule schedule = experiment_schedule(c, split.stream, seed);
    const std::size_t quota = c.quota();

    auto model = make_model(c, in.num_classes, in.data, derive_seed(seed, {kModel}));
    std::unique_ptr<Model> aux;
    if (run.objective == Objective::rho_loss) {
        if (split.target_pool.empty())
            throw ConfigError("rho_loss needs a labelled holdout; raise target_fraction",
                              "stream.dataset.target_fraction");
        aux = make_model(c, in.num_classes, in.data, derive_seed(seed, {kAux}));
        const auto t0 = Clock::now();
        aux->fit(split.target_pool);
        run.timing.fit_seconds += seconds_since(t0);
    }
    ScoreOptions score_opts;
    score_opts.eta = c.objective.eta;
    score_opts.aux_model = aux.get();
    score_opts.workers = in.workers;
    const bool needs_targets = run.objective == Objective::epig || run.objective == Objective::la_epig;
    const bool needs_model = run.objective != Objective::random;

    DataStore store{{}, c.store.m};
    std::vector<std::size_t> store_sources;
    Dataset seen;
    // Store size at the last fit; npos means never fitted.
    std::size_t fitted_size = std::string::npos;
    auto refit = [&] {
        const auto t0 = Clock::now();
        model->fit(store.examples);
        run.timing.fit_seconds += seconds_since(t0);
        fitted_size = store.size();
    };

    for (std::size_t step = 0; step < schedule.num_steps(); ++step) {
        const Dataset& batch = schedule.steps[step];
        if (quota > batch.size())
            throw ConfigError("quota " + std::to_string(quota) + " exceeds the " + std::to_string(batch.size()) +
                                  " examples arriving at step " + std::to_string(step + 1),
                              "store.quota");
        seen.insert(seen.end(), batch.begin(), batch.end());
        std::vector<bool> taken(batch.size(), false);
        TargetSet targets;
        if (needs_targets)
            targets = build_target_set(c.targets, {split.target_pool, seen, in.fixed_targets},
                                       derive_seed(seed, {kTargets, step}));

        for (std::size_t slot = 0; slot < quota; ++slot) {
            std::vector<std::size_t> eligible;
            for (std::size_t i = 0; i < batch.size(); ++i)
                if (!taken[i]) eligible.push_back(i);

            SelectionRecord rec;
            rec.step = step;
            rec.slot = slot;
            if (store.size() == 0 && needs_model) {
                // Nothing to fit yet: the first example is a seeded uniform pick.
                Rng rng = make_rng(seed, {kWarm, step});
                rec.candidate = eligible[uniform_index(rng, eligible.size())];
                rec.warm_start = true;
                rec.score = rec.score_min = rec.score_max = rec.score_mean = std::numeric_limits<double>::quiet_NaN();
                rec.num_candidates = eligible.size();
            } else {
                if (needs_model && (fitted_size == std::string::npos || store.size() - fitted_size >= c.training.refit_every))
                    refit();
                Dataset pool;
                pool.reserve(eligible.size());
                for (auto i : eligible) pool.push_back(batch[i]);
                const auto t0 = Clock::now();
                const ScoreReport report = score_pool(run.objective, *model, pool, targets,
                                                      derive_seed(seed, {kScore, step, slot}), score_opts);
                run.timing.score_seconds += seconds_since(t0);
                rec.candidate = eligible[report.best()];
                rec.score = report.values[report.best()];
                summarize_scores(report, rec);
            }
            taken[rec.candidate] = true;
            rec.source_index = schedule.source_indices[step][rec.candidate];
            store.add(batch[rec.candidate]);
            store_sources.push_back(rec.source_index);
            run.selections.push_back(rec);
        }

        if (fitted_size != store.size()) refit();
        const auto t0 = Clock::now();
        run.accuracy.push_back(evaluate_accuracy(*model, split.test));
        run.timing.evaluate_seconds += seconds_since(t0);

        std::vector<std::size_t> counts(in.num_classes, 0);
        for (const auto& e : store.examples) ++counts.at(static_cast<std::size_t>(e.label));
        run.store_class_counts.push_back(std::move(counts));
        run.store_sources.push_back(store_sources);

        StepSizes sizes;
        sizes.arrived = static_cast<double>(batch.size());
        sizes.selected = static_cast<double>(quota);
        sizes.stored = static_cast<double>(store.size());
        run.ledger.record(charge_step(Strategy::D, sizes, static_cast<double>(c.store.tau)));
    }
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config, const ExperimentOptions& options) {
    if (config.store.strategy != Strategy::D)
        throw ConfigError("experiments run strategy D; strategy " + std::string(strategy_name(config.store.strategy)) +
                              " is available through apply_strategy only",
                          "store.strategy");
    const auto start = Clock::now();
    const Dataset data = load_dataset(config.stream.dataset);
    validate_dataset(data);
    std::vector<Features> fixed_targets;
    if (config.targets.source == "fixed") fixed_targets = load_feature_csv(config.targets.path);

    ExperimentResult result;
    result.config = config;
    result.num_classes = infer_num_classes(data);
    const RunInputs inputs{config, data, result.num_classes, fixed_targets, std::max<std::size_t>(1, options.workers)};

    for (auto objective : config.objective.names)
        for (auto seed : config.seeds) {
            SeedRun run;
            run.objective = objective;
            run.seed = seed;
            try {
                run_seed(inputs, run);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                run.failed = true;
                run.failure = e.what();
            }
            if (options.progress) {
                std::string line = std::string(objective_name(objective)) + " seed " + std::to_string(seed) + ": ";
                line += run.failed ? "failed (" + run.failure + ")"
                                   : "final accuracy " + format_double(run.accuracy.back());
                options.progress(line);
            }
            result.runs.push_back(std::move(run));
        }
    result.total_seconds = seconds_since(start);
    return result;
}

std::vector<CurveSummary> summarize(const ExperimentResult& result) {
    std::vector<CurveSummary> out;
    const std::size_t steps = result.config.stream.steps;
    for (auto objective : result.config.objective.names) {
        CurveSummary s;
        s.objective = objective;
        std::vector<const SeedRun*> ok;
        for (const auto& r : result.runs) {
            if (r.objective != objective) continue;
            if (r.failed) {
                s.failed_seeds.push_back(r.seed);
            } else {
                ok.push_back(&r);
            }
        }
        s.seeds_ok = ok.size();
        for (std::size_t t = 0; t < steps && !ok.empty(); ++t) {
            double sum = 0.0;
            for (auto* r : ok) sum += r->accuracy[t];
            const double mean = sum / static_cast<double>(ok.size());
            double ss = 0.0;
            for (auto* r : ok) ss += (r->accuracy[t] - mean) * (r->accuracy[t] - mean);
            const double n = static_cast<double>(ok.size());
            s.mean.push_back(mean);
            s.standard_error.push_back(ok.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace streamsift
