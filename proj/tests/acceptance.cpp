// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 7        run criteria 3 and 7 only
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "streamsift/acquisition.hpp"
#include "streamsift/bootstrap_forest.hpp"
#include "streamsift/cli.hpp"
#include "streamsift/demo.hpp"
#include "streamsift/dirichlet_histogram.hpp"
#include "streamsift/dropout_mlp.hpp"
#include "streamsift/finite_hypothesis.hpp"
#include "streamsift/harness.hpp"
#include "streamsift/io.hpp"
#include "streamsift/random.hpp"
#include "streamsift/store.hpp"

using namespace streamsift;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("streamsift_acceptance_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

int run_cli(std::vector<std::string> args, std::string* captured = nullptr) {
    args.insert(args.begin(), "streamsift");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (captured) *captured = out.str();
    return code;
}

// 1 ------------------------------------------------------------------------------------------

Outcome oracle_equivalence() {
    Stopwatch clock;
    Rng rng = make_rng(1001);
    std::size_t fixtures = 0, comparisons = 0;
    double worst = 0.0;
    for (; fixtures < 150; ++fixtures) {
        const std::size_t hyps = 2 + uniform_index(rng, 4);
        const std::size_t classes = 2 + uniform_index(rng, 3);
        const std::size_t grid = 2 + uniform_index(rng, 5);
        const auto e = oracle::random_enumeration(rng, hyps, grid, classes);
        const auto model = e.model();
        TargetSet targets{e.grid_points()};
        for (std::size_t g = 0; g < grid; ++g)
            for (std::size_t y = 0; y < classes; ++y) {
                double expected = 0.0;
                for (std::size_t s = 0; s < grid; ++s) expected += e.predictive_ig(g, y, s);
                expected /= static_cast<double>(grid);
                const double got = la_epig(model, targets.inputs[g], y, targets);
                worst = std::max(worst, std::abs(got - expected));
                ++comparisons;
            }
    }
    const double secs = clock.seconds();
    return {worst <= 1e-10 && secs < 1.0,
            fmt("%zu fixtures, %zu (x, y) pairs, max |la_epig - brute force| = %.3g (tol 1e-10), %.3f s (limit 1 s)",
                fixtures, comparisons, worst, secs)};
}

// 2 ------------------------------------------------------------------------------------------

Outcome epig_identity() {
    Stopwatch clock;
    Rng rng = make_rng(1002);
    const std::size_t classes = 3;
    Dataset data;
    for (int i = 0; i < 60; ++i) {
        const double a = uniform_unit(rng), b = uniform_unit(rng);
        data.push_back({{a, b}, a + b > 1.0 ? 1 : (a > 0.7 ? 2 : 0)});
    }
    TargetSet targets;
    for (int i = 0; i < 16; ++i) targets.inputs.push_back({uniform_unit(rng), uniform_unit(rng)});

    std::vector<std::unique_ptr<Model>> models;
    {
        std::vector<Features> grid;
        for (int i = 0; i <= 10; ++i)
            for (int j = 0; j <= 10; ++j) grid.push_back({i / 10.0, j / 10.0});
        std::vector<std::vector<std::vector<double>>> tables(6);
        for (auto& table : tables)
            for (std::size_t g = 0; g < grid.size(); ++g) {
                std::vector<double> row(classes);
                double s = 0.0;
                for (auto& v : row) s += (v = 0.05 + uniform_unit(rng));
                for (auto& v : row) v /= s;
                table.push_back(row);
            }
        auto set = std::make_shared<TabularHypotheses>(grid, tables);
        models.push_back(std::make_unique<FiniteHypothesisModel>(set));
    }
    DirichletHistogramConfig dc;
    dc.lower = {0.0, 0.0};
    dc.upper = {1.0, 1.0};
    dc.num_classes = classes;
    dc.num_samples = 200;
    models.push_back(std::make_unique<DirichletHistogramClassifier>(dc));
    ForestConfig fc;
    fc.num_classes = classes;
    fc.num_trees = 30;
    models.push_back(std::make_unique<BootstrapForest>(fc));
    MlpConfig mc;
    mc.num_classes = classes;
    mc.hidden = {16, 16};
    mc.max_steps = 200;
    mc.num_samples = 30;
    models.push_back(std::make_unique<DropoutMLP>(mc));

    // The tabular model only answers on its 0.1 grid.
    auto snap = [](double v) { return std::round(v * 10.0) / 10.0; };
    std::string detail;
    bool pass = true;
    for (auto& model : models) {
        const bool tabular = model->kind() == "finite_hypothesis";
        if (tabular) {
            Dataset snapped = data;
            for (auto& ex : snapped)
                for (auto& f : ex.features) f = snap(f);
            model->fit(snapped);
        } else {
            model->fit(data);
        }
        TargetSet ts = targets;
        if (tabular)
            for (auto& t : ts.inputs)
                for (auto& f : t) f = snap(f);
        double worst = 0.0;
        std::size_t inputs = 0;
        for (; inputs < 120; ++inputs) {
            std::vector<double> x{uniform_unit(rng), uniform_unit(rng)};
            if (tabular)
                for (auto& f : x) f = snap(f);
            const double value = epig(*model, x, ts);
            const auto p = model->marginal_predict(x);
            double expected = 0.0;
            for (std::size_t c = 0; c < classes; ++c)
                if (p[c] > 0.0) expected += p[c] * la_epig(*model, x, c, ts);
            worst = std::max(worst, std::abs(value - expected));
        }
        pass = pass && worst <= 1e-9;
        detail += fmt("%s %zu inputs max %.3g; ", model->kind().c_str(), inputs, worst);
    }
    const double secs = clock.seconds();
    pass = pass && secs < 10.0;
    return {pass, detail + fmt("tol 1e-9, %.2f s (limit 10 s)", secs)};
}

// 3 ------------------------------------------------------------------------------------------

Outcome mic_kl_bound() {
    Stopwatch clock;
    Rng rng = make_rng(1003);
    std::size_t cases = 0, violations = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    for (; cases < 2000; ++cases) {
        DirichletHistogramConfig cfg;
        const std::size_t dim = 1 + uniform_index(rng, 2);
        cfg.lower.assign(dim, 0.0);
        cfg.upper.assign(dim, 1.0);
        cfg.bins_per_dim = 1 + uniform_index(rng, 4);
        cfg.num_classes = 2 + uniform_index(rng, 5);
        cfg.alpha0 = 0.05 + 5.0 * uniform_unit(rng);
        cfg.num_samples = 1;
        DirichletHistogramClassifier model(cfg);
        Dataset data;
        const std::size_t n = uniform_index(rng, 60);
        for (std::size_t i = 0; i < n; ++i) {
            Features f(dim);
            for (auto& v : f) v = uniform_unit(rng);
            data.push_back({f, static_cast<int>(uniform_index(rng, cfg.num_classes))});
        }
        model.fit(data);
        Features x(dim);
        for (auto& v : x) v = uniform_unit(rng);
        const std::size_t y = uniform_index(rng, cfg.num_classes);
        const double gap = mic(model, x, y, 1.0) - model.parameter_kl_of_update(x, y);
        min_gap = std::min(min_gap, gap);
        if (!(gap >= -1e-9)) ++violations;
    }
    const double secs = clock.seconds();
    return {violations == 0 && secs < 5.0,
            fmt("%zu cases, %zu violations, min(mic - kl) = %.3g (tol -1e-9), %.2f s (limit 5 s)", cases, violations,
                min_gap, secs)};
}

// 4 ------------------------------------------------------------------------------------------

Outcome epig_nonnegative() {
    Rng rng = make_rng(1004);
    std::size_t evaluations = 0, negatives = 0;
    double min_value = std::numeric_limits<double>::infinity();
    auto record = [&](double v) {
        ++evaluations;
        min_value = std::min(min_value, v);
        if (!(v >= 0.0)) ++negatives;
    };

    // Finite hypothesis tables, including exact zeros and near-deterministic rows.
    for (int trial = 0; trial < 800; ++trial) {
        const std::size_t hyps = 1 + uniform_index(rng, 6);
        const std::size_t classes = 2 + uniform_index(rng, 4);
        const std::size_t grid = 2 + uniform_index(rng, 6);
        oracle::Enumeration e;
        e.prior.resize(hyps);
        double z = 0.0;
        for (auto& p : e.prior) z += (p = uniform_unit(rng) + 1e-3);
        for (auto& p : e.prior) p /= z;
        e.table.assign(hyps, std::vector<std::vector<double>>(grid, std::vector<double>(classes)));
        for (auto& per_hyp : e.table)
            for (auto& row : per_hyp) {
                double s = 0.0;
                for (auto& v : row) {
                    const double u = uniform_unit(rng);
                    v = u < 0.2 ? 0.0 : (u < 0.3 ? 1e-12 : std::pow(uniform_unit(rng), 4.0));
                    s += v;
                }
                if (s == 0.0) row[uniform_index(rng, classes)] = s = 1.0;
                for (auto& v : row) v /= s;
            }
        const auto model = e.model();
        TargetSet targets{e.grid_points()};
        for (const auto& x : targets.inputs) record(epig(model, x, targets));
        TargetSet one{{targets.inputs[uniform_index(rng, grid)]}};
        for (const auto& x : targets.inputs) record(epig(model, x, one));
    }

    // Dirichlet and forest models on random data.
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t classes = 2 + uniform_index(rng, 4);
        Dataset data;
        const std::size_t n = 1 + uniform_index(rng, 50);
        for (std::size_t i = 0; i < n; ++i)
            data.push_back({{uniform_unit(rng), uniform_unit(rng)}, static_cast<int>(uniform_index(rng, classes))});
        TargetSet targets;
        const std::size_t m = 1 + uniform_index(rng, 20);
        for (std::size_t i = 0; i < m; ++i) targets.inputs.push_back({uniform_unit(rng), uniform_unit(rng)});

        DirichletHistogramConfig dc;
        dc.lower = {0.0, 0.0};
        dc.upper = {1.0, 1.0};
        dc.bins_per_dim = 1 + uniform_index(rng, 5);
        dc.num_classes = classes;
        dc.alpha0 = 0.05 + 2.0 * uniform_unit(rng);
        dc.num_samples = 20 + uniform_index(rng, 100);
        dc.seed = static_cast<std::uint64_t>(trial);
        DirichletHistogramClassifier dirichlet(dc);
        dirichlet.fit(data);

        ForestConfig fc;
        fc.num_classes = classes;
        fc.num_trees = 5 + uniform_index(rng, 20);
        fc.smoothing = uniform_unit(rng) < 0.3 ? 1e-9 : 0.01 + uniform_unit(rng);
        fc.seed = static_cast<std::uint64_t>(trial);
        BootstrapForest forest(fc);
        forest.fit(data);

        for (int i = 0; i < 50; ++i) {
            const std::vector<double> x{uniform_unit(rng), uniform_unit(rng)};
            record(epig(dirichlet, x, targets));
            record(epig(forest, x, targets));
        }
    }
    return {negatives == 0 && evaluations >= 10000,
            fmt("%zu evaluations (need >= 10000), %zu negative, min %.3g", evaluations, negatives, min_value)};
}

// 5 ------------------------------------------------------------------------------------------

Outcome table_costs() {
    Stopwatch clock;
    const std::size_t steps = 100, n = 12, m = 5;
    StreamSchedule schedule;
    for (std::size_t t = 0; t < steps; ++t) {
        Dataset batch;
        for (std::size_t i = 0; i < n; ++i)
            batch.push_back({{static_cast<double>(t), static_cast<double>(i)}, static_cast<int>(i % 2)});
        schedule.steps.push_back(std::move(batch));
    }
    auto formula = [&](Strategy s, double t, double tau) -> CostReading {
        const double dn = static_cast<double>(n), dm = static_cast<double>(m);
        switch (s) {
            case Strategy::A: return {0, 0, dn};
            case Strategy::B: return {dn * t, 0, dn * t / tau};
            case Strategy::C: return {dn * t, dn * t / tau, dm / tau};
            case Strategy::D: return {dm * t, dn, dm * t / tau};
            case Strategy::E: return {dm, dn, dm / tau};
        }
        return {};
    };
    std::size_t mismatches = 0, readings = 0;
    bool shapes = true;
    for (auto s : {Strategy::A, Strategy::B, Strategy::C, Strategy::D, Strategy::E})
        for (std::size_t tau : {1, 4}) {
            const auto run = apply_strategy(s, schedule, random_selector(), m, tau);
            const auto& per = run.ledger.per_step();
            if (per.size() != steps) {
                mismatches += steps;
                continue;
            }
            for (std::size_t t = 1; t <= steps; ++t, ++readings)
                if (!(per[t - 1] == formula(s, static_cast<double>(t), static_cast<double>(tau)))) ++mismatches;
            // Constant for A and E, strictly linear growth in t for B, C and D.
            const bool constant = std::all_of(per.begin(), per.end(), [&](const CostReading& r) {
                return r.storage == per[0].storage && r.training == per[0].training;
            });
            const bool linear = per[0].storage > 0 && per[steps - 1].storage == steps * per[0].storage;
            if (s == Strategy::A || s == Strategy::E) shapes = shapes && constant;
            else shapes = shapes && linear && !constant;
        }
    const double secs = clock.seconds();
    return {mismatches == 0 && shapes && secs < 1.0,
            fmt("%zu readings over 5 strategies x tau {1,4}, %zu mismatches, growth classes %s, %.3f s (limit 1 s)",
                readings, mismatches, shapes ? "ok" : "wrong", secs)};
}

// 6 ------------------------------------------------------------------------------------------

Outcome gradient_check() {
    MlpConfig cfg;
    cfg.hidden = {5, 4};
    cfg.num_classes = 3;
    cfg.seed = 11;
    DropoutMLP mlp(cfg);
    MlpParameters params = mlp.initial_parameters(3);

    Rng rng = make_rng(1006);
    Eigen::MatrixXd x(8, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * uniform_unit(rng) - 1.0;
    const std::vector<int> y{0, 1, 2, 1, 0, 2, 2, 1};
    DropoutMasks masks{Eigen::MatrixXd(8, 5), Eigen::MatrixXd(8, 4)};
    for (auto& m : masks)
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform_unit(rng) < 0.2 ? 0.0 : 1.25;
    for (auto& layer : params)
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = uniform_unit(rng) - 0.5;

    // Central differences are meaningless across a ReLU kink, so the fixture must keep
    // every hidden pre-activation well away from zero.
    double margin = std::numeric_limits<double>::infinity();
    {
        Eigen::MatrixXd a = x;
        for (std::size_t l = 0; l + 1 < params.size(); ++l) {
            const Eigen::MatrixXd z = (a * params[l].weights.transpose()).rowwise() + params[l].bias.transpose();
            margin = std::min(margin, z.cwiseAbs().minCoeff());
            a = z.cwiseMax(0.0).cwiseProduct(masks[l]);
        }
    }

    double worst = 0.0;
    std::size_t checked = 0;
    for (double decay : {0.0, 1e-2}) {
        MlpParameters grad;
        mlp_loss(params, x, y, masks, decay, &grad);
        const double h = 1e-6;
        auto probe = [&](double& slot, double analytic) {
            const double saved = slot;
            slot = saved + h;
            const double up = mlp_loss(params, x, y, masks, decay);
            slot = saved - h;
            const double down = mlp_loss(params, x, y, masks, decay);
            slot = saved;
            const double numeric = (up - down) / (2.0 * h);
            worst = std::max(worst, std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6}));
            ++checked;
        };
        for (std::size_t l = 0; l < params.size(); ++l) {
            for (Eigen::Index i = 0; i < params[l].weights.size(); ++i)
                probe(params[l].weights.data()[i], grad[l].weights.data()[i]);
            for (Eigen::Index i = 0; i < params[l].bias.size(); ++i) probe(params[l].bias.data()[i], grad[l].bias.data()[i]);
        }
    }
    return {worst < 1e-4 && margin > 1e-4,
            fmt("%zu parameter probes, max relative error %.3g (limit 1e-4), min |pre-activation| %.3g", checked, worst,
                margin)};
}

// 7 ------------------------------------------------------------------------------------------

Outcome directional_experiment() {
    Stopwatch clock;
    RunConfig config;
    config.stream.kind = Nonstationarity::split;
    config.stream.steps = 5;
    config.stream.dataset.source = "synth_blobs";
    config.stream.dataset.num_classes = 10;
    config.stream.dataset.per_class = 200;  // 100 per class reach the stream, so n = 200 per step
    config.model.kind = "forest";
    config.objective.names = {Objective::random, Objective::epig};
    config.store.strategy = Strategy::D;
    config.store.m = 100;
    config.targets.source = "global";
    config.targets.M = 100;
    config.seeds.clear();
    for (std::uint64_t s = 0; s < 10; ++s) config.seeds.push_back(s);

    const auto result = run_experiment(config);
    const std::size_t seeds = config.seeds.size();
    std::vector<double> random_final, epig_final;
    for (const auto& run : result.runs) {
        if (run.failed) continue;
        (run.objective == Objective::epig ? epig_final : random_final).push_back(run.accuracy.back());
    }
    if (random_final.size() != seeds || epig_final.size() != seeds)
        return {false, fmt("%zu seeds failed", result.failed_count())};

    auto mean_se = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double a : v) mean += a;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double a : v) ss += (a - mean) * (a - mean);
        return std::pair{mean, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
    };
    std::vector<double> diff(seeds);
    for (std::size_t i = 0; i < seeds; ++i) diff[i] = epig_final[i] - random_final[i];
    const auto [mr, ser] = mean_se(random_final);
    const auto [me, see] = mean_se(epig_final);
    const auto [md, sed] = mean_se(diff);
    const double secs = clock.seconds();
    return {md > 0.0 && secs < 600.0,
            fmt("%zu seeds, final accuracy random %.4f +/- %.4f, epig %.4f +/- %.4f, "
                "effect (epig - random) %+.4f +/- %.4f paired SE, %.1f s (target 600 s)",
                seeds, mr, ser, me, see, md, sed, secs)};
}

// 8 ------------------------------------------------------------------------------------------

Outcome heatmap_demo() {
    TempDir dir("demo");
    Stopwatch clock;
    const TwoBellsProblem problem = two_bells_problem(0);
    const FiniteHypothesisModel model = two_bells_model(problem, 0);
    HeatmapOptions opts;  // 64 x 64, 256 targets
    const auto grids = render_heatmaps(model, problem, opts);
    const auto files = write_heatmaps(grids, dir.path);
    const double secs = clock.seconds();
    const auto checks = check_heatmaps(model, problem, grids, opts);
    const bool a = checks.epig_nonnegative && checks.epig_label_free;
    const bool b = checks.la_epig_true_mean > checks.la_epig_flipped_mean;
    const bool c = checks.mic_far_mean > checks.mic_near_mean;
    return {a && b && c && files.size() == 10 && secs < 60.0,
            fmt("%zux%zu, %zu files; (a) epig label-free %s, non-negative %s; "
                "(b) mean la_epig true %.4g vs flipped %.4g; (c) mean mic far %.4g vs near %.4g; %.1f s (limit 60 s)",
                opts.resolution, opts.resolution, files.size(), checks.epig_label_free ? "yes" : "no",
                checks.epig_nonnegative ? "yes" : "no", checks.la_epig_true_mean, checks.la_epig_flipped_mean,
                checks.mic_far_mean, checks.mic_near_mean, secs)};
}

// 9 ------------------------------------------------------------------------------------------

Outcome determinism() {
    TempDir dir("det");
    write_text(dir / "run.json", R"({
  "stream": {"kind": "split", "steps": 2,
             "dataset": {"source": "synth_blobs", "num_classes": 4, "per_class": 24, "dim": 3, "spread": 0.4}},
  "model": {"kind": "forest"},
  "objective": {"name": ["random", "epig", "la_epig", "mic", "rho_loss"]},
  "store": {"m": 6},
  "targets": {"source": "global", "M": 10},
  "sampling": {"K": 8},
  "seeds": [0, 1]
})");
    Dataset store, candidates;
    Rng rng = make_rng(1009);
    for (int i = 0; i < 20; ++i) store.push_back({{uniform_unit(rng), uniform_unit(rng)}, i % 2});
    for (int i = 0; i < 12; ++i) candidates.push_back({{uniform_unit(rng), uniform_unit(rng)}, i % 2});
    std::vector<Features> targets;
    for (int i = 0; i < 8; ++i) targets.push_back({uniform_unit(rng), uniform_unit(rng)});
    write_csv(dir / "store.csv", store);
    write_csv(dir / "cand.csv", candidates);
    write_feature_csv(dir / "targets.csv", targets);
    write_text(dir / "model.json", R"({"kind": "forest", "K": 10})");

    std::vector<std::string> compared, differing;
    auto same = [&](const std::string& label, const std::string& a, const std::string& b) {
        compared.push_back(label);
        if (a != b || a.empty()) differing.push_back(label);
    };
    // Run outputs echo the config, output.dir included, so both runs write to the same place.
    const std::string run_dir = "output.dir=\"" + (dir / "run").string() + "\"";
    for (const char* tag : {"a", "b"}) {
        const std::string t = tag;
        run_cli({"run", (dir / "run.json").string(), "--override", run_dir});
        fs::rename(dir / "run", dir / ("run_" + t));
        run_cli({"demo", "--resolution", "8", "--targets", "32", "--output", (dir / ("demo_" + t)).string()});
        run_cli({"stream", (dir / "run.json").string(), "--output", (dir / ("stream_" + t)).string()});
        std::string printed;
        run_cli({"score", "--model", (dir / "model.json").string(), "--store", (dir / "store.csv").string(),
                 "--candidates", (dir / "cand.csv").string(), "--targets", (dir / "targets.csv").string(),
                 "--objective", "epig"},
                &printed);
        write_text(dir / ("score_" + t + ".csv"), printed);
    }
    auto stripped = [&](const fs::path& p) {
        const std::string text = slurp(p);
        return text.empty() ? text : strip_timing(Json::parse(text)).dump();
    };
    same("run results.json", stripped(dir / "run_a" / "results.json"), stripped(dir / "run_b" / "results.json"));
    same("run accuracy.csv", slurp(dir / "run_a" / "accuracy.csv"), slurp(dir / "run_b" / "accuracy.csv"));
    for (const auto& entry : fs::directory_iterator(dir / "demo_a"))
        if (entry.path().extension() == ".csv")
            same("demo " + entry.path().filename().string(), slurp(entry.path()),
                 slurp(dir / "demo_b" / entry.path().filename()));
    for (const auto& entry : fs::directory_iterator(dir / "stream_a"))
        same("stream " + entry.path().filename().string(), slurp(entry.path()),
             slurp(dir / "stream_b" / entry.path().filename()));
    same("score output", slurp(dir / "score_a.csv"), slurp(dir / "score_b.csv"));

    std::string detail = fmt("%zu output pairs compared across run/demo/stream/score", compared.size());
    for (const auto& d : differing) detail += "; differs: " + d;
    return {differing.empty() && compared.size() >= 10, detail};
}

// 10 -----------------------------------------------------------------------------------------

std::vector<unsigned char> be32(std::initializer_list<std::uint32_t> values) {
    std::vector<unsigned char> out;
    for (auto v : values)
        for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<unsigned char>(v >> s));
    return out;
}

void write_bytes(const fs::path& p, std::vector<unsigned char> head, const std::vector<unsigned char>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
}

Outcome ingestion() {
    TempDir dir("io");
    std::vector<std::string> failures;
    std::size_t checks = 0;
    auto expect = [&](bool ok, const std::string& what) {
        ++checks;
        if (!ok) failures.push_back(what);
    };
    auto idx_kind = [&](const fs::path& img, const fs::path& lab) -> std::optional<IdxError::Kind> {
        try {
            load_idx(img, lab);
        } catch (const IdxError& e) {
            return e.kind();
        } catch (...) {
        }
        return std::nullopt;
    };

    // IDX fixture: 3 images of 2x2.
    const std::vector<unsigned char> pixels{0, 255, 51, 102, 1, 2, 3, 4, 200, 100, 50, 25};
    write_bytes(dir / "img", be32({0x803, 3, 2, 2}), pixels);
    write_bytes(dir / "lab", be32({0x801, 3}), {7, 0, 3});
    try {
        const auto d = load_idx(dir / "img", dir / "lab");
        expect(d.size() == 3 && d[0].label == 7 && d[2].label == 3 && d[0].features.size() == 4 &&
                   d[0].features[1] == 1.0 && d[0].features[2] == 0.2,
               "idx fixture contents");
        write_idx(dir / "img2", dir / "lab2", d, 2, 2);
        expect(slurp(dir / "img2") == slurp(dir / "img") && slurp(dir / "lab2") == slurp(dir / "lab"),
               "idx byte round trip");
        expect(load_idx(dir / "img2", dir / "lab2") == d, "idx dataset round trip");
    } catch (const std::exception& e) {
        expect(false, std::string("idx fixture threw: ") + e.what());
    }
    write_bytes(dir / "bad_magic", be32({0x802, 3, 2, 2}), pixels);
    expect(idx_kind(dir / "bad_magic", dir / "lab") == IdxError::Kind::bad_magic, "idx bad image magic");
    write_bytes(dir / "bad_lab_magic", be32({0x803, 3}), {7, 0, 3});
    expect(idx_kind(dir / "img", dir / "bad_lab_magic") == IdxError::Kind::bad_magic, "idx bad label magic");
    write_bytes(dir / "short_img", be32({0x803, 3, 2, 2}), {0, 255, 51});
    expect(idx_kind(dir / "short_img", dir / "lab") == IdxError::Kind::truncated, "idx truncated pixels");
    write_bytes(dir / "short_head", {0, 0, 8, 3, 0, 0}, {});
    expect(idx_kind(dir / "short_head", dir / "lab") == IdxError::Kind::truncated, "idx truncated header");
    write_bytes(dir / "short_lab", be32({0x801, 3}), {7});
    expect(idx_kind(dir / "img", dir / "short_lab") == IdxError::Kind::truncated, "idx truncated labels");
    write_bytes(dir / "two_lab", be32({0x801, 2}), {7, 0});
    expect(idx_kind(dir / "img", dir / "two_lab") == IdxError::Kind::count_mismatch, "idx count mismatch");

    // CSV fixture round trip, including awkward doubles.
    Dataset data{{{0.1, -2.5e-300, 1e17}, 0}, {{1.0 / 3.0, 0.0, -7.0}, 4}, {{5e-324, 123456.789, 2.0}, 1}};
    write_csv(dir / "d.csv", data);
    try {
        expect(load_csv(dir / "d.csv") == data, "csv round trip");
    } catch (const std::exception& e) {
        expect(false, std::string("csv round trip threw: ") + e.what());
    }
    write_text(dir / "front.csv", "label,a,b\n2,0.5,1.5\n0,-1,3\n");
    try {
        CsvOptions opts;
        opts.label_column = 0;
        opts.header = true;
        const auto d = load_csv(dir / "front.csv", opts);
        expect(d.size() == 2 && d[0].label == 2 && d[0].features == Features{0.5, 1.5}, "csv label column 0");
    } catch (const std::exception& e) {
        expect(false, std::string("csv label column 0 threw: ") + e.what());
    }
    auto csv_rejects = [&](const std::string& text, CsvOptions opts, const std::string& what) {
        write_text(dir / "bad.csv", text);
        bool threw = false;
        try {
            load_csv(dir / "bad.csv", opts);
        } catch (const CsvError&) {
            threw = true;
        } catch (...) {
        }
        expect(threw, what);
    };
    CsvOptions out_of_range;
    out_of_range.label_column = 3;
    csv_rejects("1,2,0\n", out_of_range, "csv label column out of range");
    CsvOptions negative;
    negative.label_column = -4;
    csv_rejects("1,2,0\n", negative, "csv negative label column out of range");
    csv_rejects("1,2,0.5\n", {}, "csv non-integer label");
    csv_rejects("1,2,-1\n", {}, "csv negative label");
    csv_rejects("1,2,0\n3,x,1\n", {}, "csv non-numeric feature");
    csv_rejects("1,2,0\n3,1\n", {}, "csv ragged row");

    std::string detail = fmt("%zu ingestion checks", checks);
    for (const auto& f : failures) detail += "; failed: " + f;
    return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "oracle equivalence", oracle_equivalence},
        {2, "epig identity", epig_identity},
        {3, "mic-kl bound", mic_kl_bound},
        {4, "epig non-negativity", epig_nonnegative},
        {5, "cost trajectories", table_costs},
        {6, "gradient check", gradient_check},
        {7, "directional experiment", directional_experiment},
        {8, "heatmap demo", heatmap_demo},
        {9, "determinism", determinism},
        {10, "ingestion", ingestion},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        try {
            selected.push_back(std::stoi(argv[i]));
        } catch (const std::exception&) {
            std::cerr << "usage: acceptance [criterion number ...]\n";
            return 2;
        }
    }
    int failed = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
