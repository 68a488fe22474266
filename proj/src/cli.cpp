#include "streamsift/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "streamsift/demo.hpp"
#include "streamsift/finite_hypothesis.hpp"
#include "streamsift/harness.hpp"
#include "streamsift/io.hpp"
#include "streamsift/random.hpp"

namespace streamsift::cli {

namespace {

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path, "<file>");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what(), "<file>");
    }
}

RunConfig config_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
    Json doc = read_json_file(path);
    for (const auto& o : overrides) apply_override(doc, o);
    return parse_config(doc, env_seed());
}

/// Runs `body`, mapping errors to exit codes and messages on `err`.
template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

}  // namespace

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("STREAMSIFT_SEED");
    if (!raw || !*raw) return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (*end != '\0') return std::nullopt;
    return static_cast<std::uint64_t>(v);
}

int cmd_run(const RunFlags& flags, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = config_with_overrides(flags.config_path, flags.overrides);
        ExperimentOptions opts;
        opts.workers = flags.workers;
        opts.progress = [&](const std::string& line) { err << line << '\n'; };
        const ExperimentResult result = run_experiment(config, opts);
        write_outputs(result, config.output_dir);
        for (const auto& s : summarize(result)) {
            out << objective_name(s.objective) << ": ";
            if (s.mean.empty()) {
                out << "all seeds failed\n";
                continue;
            }
            out << "final accuracy " << format_double(s.mean.back()) << " +/- " << format_double(s.standard_error.back())
                << " (" << s.seeds_ok << " seeds";
            if (!s.failed_seeds.empty()) out << ", " << s.failed_seeds.size() << " failed";
            out << ")\n";
        }
        out << "wrote " << (std::filesystem::path(config.output_dir) / "results.json").string() << '\n';
        return result.failed_count() == result.runs.size() ? kAllSeedsFailed : kOk;
    });
}

int cmd_demo(const DemoFlags& flags, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (flags.resolution == 0) throw ConfigError("must be positive", "resolution");
        if (flags.targets == 0) throw ConfigError("must be positive", "targets");
        const TwoBellsProblem problem = two_bells_problem(flags.seed);
        const FiniteHypothesisModel model = two_bells_model(problem, flags.seed);
        HeatmapOptions opts;
        opts.resolution = flags.resolution;
        opts.num_targets = flags.targets;
        opts.seed = flags.seed;
        opts.workers = flags.workers;
        const auto grids = render_heatmaps(model, problem, opts);
        for (const auto& path : write_heatmaps(grids, flags.output)) out << path.string() << '\n';
        return kOk;
    });
}

std::unique_ptr<Model> model_from_json(const Json& spec, const Dataset& data, std::uint64_t seed) {
    if (!spec.is_object()) throw ConfigError("model spec must be an object", "<model>");
    const std::string kind = spec.value("kind", std::string("forest"));
    if (kind == "finite_hypothesis") {
        for (const auto& item : spec.items())
            if (!std::set<std::string>{"kind", "grid", "tables", "prior", "key_dims"}.count(item.key()))
                throw ConfigError("unknown key", item.key());
        try {
            auto grid = spec.at("grid").get<std::vector<Features>>();
            auto tables = spec.at("tables").get<std::vector<std::vector<std::vector<double>>>>();
            const auto key_dims = spec.value("key_dims", std::size_t{0});
            auto set = std::make_shared<TabularHypotheses>(std::move(grid), std::move(tables), key_dims);
            if (spec.contains("prior"))
                return std::make_unique<FiniteHypothesisModel>(set, spec.at("prior").get<std::vector<double>>());
            return std::make_unique<FiniteHypothesisModel>(set);
        } catch (const Json::exception& e) {
            throw ConfigError(std::string("malformed finite hypothesis spec: ") + e.what(), "<model>");
        }
    }
    Json doc = Json::object();
    std::optional<std::size_t> num_classes;
    for (const auto& item : spec.items()) {
        const auto& key = item.key();
        if (key == "kind" || key == "hyperparameters") {
            doc["model"][key] = item.value();
        } else if (key == "K") {
            doc["sampling"]["K"] = item.value();
        } else if (key == "training") {
            doc["training"] = item.value();
        } else if (key == "seed") {
            if (!item.value().is_number_unsigned()) throw ConfigError("expected a non-negative integer", "seed");
            seed = item.value().get<std::uint64_t>();
        } else if (key == "num_classes") {
            if (!item.value().is_number_unsigned()) throw ConfigError("expected a non-negative integer", "num_classes");
            num_classes = item.value().get<std::size_t>();
        } else {
            throw ConfigError("unknown key", key);
        }
    }
    const RunConfig config = parse_config(doc);
    const std::size_t classes = std::max<std::size_t>(2, num_classes.value_or(infer_num_classes(data)));
    return make_model(config, classes, data, seed);
}

int cmd_score(const ScoreFlags& flags, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Objective objective = parse_objective(flags.objective);
        const Json spec = read_json_file(flags.model_path);
        const Dataset store = flags.store_path.empty() ? Dataset{} : load_csv(flags.store_path);
        const Dataset candidates = load_csv(flags.candidates_path);
        TargetSet targets;
        if (objective == Objective::epig || objective == Objective::la_epig) {
            if (flags.targets_path.empty()) throw ConfigError("epig and la_epig need --targets", "targets");
            targets.inputs = load_feature_csv(flags.targets_path);
        }
        Dataset everything = store;
        everything.insert(everything.end(), candidates.begin(), candidates.end());
        Dataset aux_store;
        if (!flags.aux_store_path.empty()) {
            aux_store = load_csv(flags.aux_store_path);
            everything.insert(everything.end(), aux_store.begin(), aux_store.end());
        }
        validate_dataset(everything);

        auto model = model_from_json(spec, everything, flags.seed);
        model->fit(store);
        std::unique_ptr<Model> aux;
        ScoreOptions opts;
        opts.eta = flags.eta;
        opts.workers = flags.workers;
        if (objective == Objective::rho_loss) {
            if (aux_store.empty()) throw ConfigError("rho_loss needs --aux-store", "aux-store");
            aux = model_from_json(spec, everything, derive_seed(flags.seed, {1}));
            aux->fit(aux_store);
            opts.aux_model = aux.get();
        }
        const ScoreReport report = score_pool(objective, *model, candidates, targets, flags.seed, opts);
        std::vector<std::size_t> rank(candidates.size());
        for (std::size_t r = 0; r < report.ranked.size(); ++r) rank[report.ranked[r].candidate_index] = r + 1;
        out << "index,score,rank\n";
        for (std::size_t i = 0; i < candidates.size(); ++i)
            out << i << ',' << format_double(report.values[i]) << ',' << rank[i] << '\n';
        return kOk;
    });
}

int cmd_stream(const StreamFlags& flags, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = config_with_overrides(flags.config_path, flags.overrides);
        const Dataset data = load_dataset(config.stream.dataset);
        const DataSplit split = experiment_split(config, data, config.seeds.front());
        const StreamSchedule schedule = experiment_schedule(config, split.stream, config.seeds.front());
        std::filesystem::create_directories(flags.output);
        for (std::size_t t = 0; t < schedule.num_steps(); ++t) {
            const auto path = std::filesystem::path(flags.output) / ("step_" + std::to_string(t + 1) + ".csv");
            write_csv(path, schedule.steps[t]);
            out << path.string() << '\n';
        }
        return kOk;
    });
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stream subsampling experiments with information-based acquisition objectives"};
    app.require_subcommand(1);
    const std::uint64_t default_seed = env_seed().value_or(0);

    RunFlags run;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment from a JSON config");
    run_cmd->add_option("config", run.config_path, "Config file")->required();
    run_cmd->add_option("--override,-o", run.overrides, "dotted.path=<json> (repeatable)");
    run_cmd->add_option("--workers,-j", run.workers, "Scoring threads")->check(CLI::PositiveNumber);

    DemoFlags demo;
    demo.seed = default_seed;
    auto* demo_cmd = app.add_subcommand("demo", "Render the two-bells acquisition heatmaps");
    demo_cmd->add_option("--resolution", demo.resolution, "Cells per axis")->capture_default_str();
    demo_cmd->add_option("--output", demo.output, "Output directory")->capture_default_str();
    demo_cmd->add_option("--seed", demo.seed, "Seed")->capture_default_str();
    demo_cmd->add_option("--targets", demo.targets, "Target inputs M")->capture_default_str();
    demo_cmd->add_option("--workers,-j", demo.workers, "Scoring threads")->check(CLI::PositiveNumber);

    ScoreFlags score;
    score.seed = default_seed;
    auto* score_cmd = app.add_subcommand("score", "Fit a model on a store and rank candidates");
    score_cmd->add_option("--model", score.model_path, "Model spec JSON")->required();
    score_cmd->add_option("--store", score.store_path, "Labelled training CSV (label last)");
    score_cmd->add_option("--candidates", score.candidates_path, "Labelled candidate CSV (label last)")->required();
    score_cmd->add_option("--targets", score.targets_path, "Target input CSV");
    score_cmd->add_option("--aux-store", score.aux_store_path, "Holdout CSV for rho_loss");
    score_cmd->add_option("--objective", score.objective, "random, mic, epig, la_epig or rho_loss")->capture_default_str();
    score_cmd->add_option("--eta", score.eta, "MIC learnability weight")->capture_default_str();
    score_cmd->add_option("--seed", score.seed, "Seed")->capture_default_str();
    score_cmd->add_option("--workers,-j", score.workers, "Scoring threads")->check(CLI::PositiveNumber);

    StreamFlags stream;
    auto* stream_cmd = app.add_subcommand("stream", "Write the stream schedule of a config as per-step CSVs");
    stream_cmd->add_option("config", stream.config_path, "Config file")->required();
    stream_cmd->add_option("--override,-o", stream.overrides, "dotted.path=<json> (repeatable)");
    stream_cmd->add_option("--output", stream.output, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }
    if (run_cmd->parsed()) return cmd_run(run, out, err);
    if (demo_cmd->parsed()) return cmd_demo(demo, out, err);
    if (score_cmd->parsed()) return cmd_score(score, out, err);
    return cmd_stream(stream, out, err);
}

}  // namespace streamsift::cli
