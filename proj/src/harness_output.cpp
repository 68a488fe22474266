#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "streamsift/harness.hpp"
#include "streamsift/io.hpp"

namespace streamsift {

namespace {

/// JSON has no infinities or NaN; those become null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json reading_json(const CostReading& r) {
    return {{"storage", r.storage}, {"selection", r.selection}, {"training", r.training}};
}

Json run_json(const SeedRun& r) {
    Json out;
    out["objective"] = std::string(objective_name(r.objective));
    out["seed"] = r.seed;
    out["status"] = r.failed ? "failed" : "ok";
    if (r.failed) out["failure"] = r.failure;
    out["accuracy"] = r.accuracy;

    Json store = Json::array();
    for (std::size_t t = 0; t < r.store_sources.size(); ++t)
        store.push_back({{"step", t + 1},
                         {"size", r.store_sources[t].size()},
                         {"class_counts", r.store_class_counts[t]},
                         {"sources", r.store_sources[t]}});
    out["store"] = store;

    Json selections = Json::array();
    for (const auto& s : r.selections)
        selections.push_back({{"step", s.step + 1},
                              {"slot", s.slot},
                              {"candidate", s.candidate},
                              {"source_index", s.source_index},
                              {"warm_start", s.warm_start},
                              {"score", number(s.score)},
                              {"score_min", number(s.score_min)},
                              {"score_max", number(s.score_max)},
                              {"score_mean", number(s.score_mean)},
                              {"num_candidates", s.num_candidates},
                              {"num_degenerate", s.num_degenerate},
                              {"target_evaluations", s.target_evaluations},
                              {"candidate_evaluations", s.candidate_evaluations}});
    out["selections"] = selections;

    Json per_step = Json::array();
    Json cumulative = Json::array();
    for (const auto& c : r.ledger.per_step()) per_step.push_back(reading_json(c));
    for (const auto& c : r.ledger.cumulative()) cumulative.push_back(reading_json(c));
    out["ledger"] = {{"strategy", "D"}, {"per_step", per_step}, {"cumulative", cumulative}};
    out["timing"] = {{"fit_seconds", r.timing.fit_seconds},
                     {"score_seconds", r.timing.score_seconds},
                     {"evaluate_seconds", r.timing.evaluate_seconds}};
    return out;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

Json result_to_json(const ExperimentResult& result) {
    Json doc;
    doc["config"] = config_to_json(result.config);
    doc["num_classes"] = result.num_classes;
    Json summary = Json::array();
    for (const auto& s : summarize(result)) {
        Json means = Json::array(), errors = Json::array();
        for (double v : s.mean) means.push_back(number(v));
        for (double v : s.standard_error) errors.push_back(number(v));
        summary.push_back({{"objective", std::string(objective_name(s.objective))},
                           {"seeds_ok", s.seeds_ok},
                           {"failed_seeds", s.failed_seeds},
                           {"mean_accuracy", means},
                           {"standard_error", errors}});
    }
    doc["summary"] = summary;
    Json runs = Json::array();
    for (const auto& r : result.runs) runs.push_back(run_json(r));
    doc["runs"] = runs;
    doc["timing"] = {{"total_seconds", result.total_seconds}};
    return doc;
}

Json strip_timing(Json doc) {
    if (doc.is_object()) {
        doc.erase("timing");
        for (auto& item : doc.items()) item.value() = strip_timing(item.value());
    } else if (doc.is_array()) {
        for (auto& v : doc) v = strip_timing(v);
    }
    return doc;
}

std::string accuracy_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "seed,step,objective,accuracy\n";
    for (const auto& r : result.runs)
        for (std::size_t t = 0; t < r.accuracy.size(); ++t)
            out << r.seed << ',' << t + 1 << ',' << objective_name(r.objective) << ',' << format_double(r.accuracy[t])
                << '\n';
    return out.str();
}

std::string learning_curve_svg(const ExperimentResult& result) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    const double width = 640, height = 400;
    const double left = 60, right = 150, top = 30, bottom = 50;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    const auto curves = summarize(result);
    const std::size_t steps = result.config.stream.steps;

    // y range: the data's span with a little padding, clipped to [0, 1].
    double lo = 1.0, hi = 0.0;
    for (const auto& c : curves)
        for (std::size_t t = 0; t < c.mean.size(); ++t) {
            lo = std::min(lo, c.mean[t] - c.standard_error[t]);
            hi = std::max(hi, c.mean[t] + c.standard_error[t]);
        }
    if (lo > hi) {
        lo = 0.0;
        hi = 1.0;
    }
    const double pad = std::max(0.02, 0.05 * (hi - lo));
    lo = std::max(0.0, lo - pad);
    hi = std::min(1.0, hi + pad);
    if (hi - lo < 1e-9) hi = lo + 0.1;

    auto px = [&](std::size_t t) {
        return left + (steps > 1 ? plot_w * static_cast<double>(t) / static_cast<double>(steps - 1) : plot_w / 2);
    };
    auto py = [&](double acc) { return top + plot_h * (1.0 - (acc - lo) / (hi - lo)); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = lo + (hi - lo) * i / 4.0;
        svg << "<line x1=\"" << left - 4 << "\" x2=\"" << left << "\" y1=\"" << fixed(py(v), 2) << "\" y2=\""
            << fixed(py(v), 2) << "\" stroke=\"#444\"/>";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << fixed(py(v) + 4, 2) << "\" text-anchor=\"end\">" << fixed(v, 2)
            << "</text>\n";
    }
    for (std::size_t t = 0; t < steps; ++t)
        svg << "<text x=\"" << fixed(px(t), 2) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
            << t + 1 << "</text>\n";
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">step</text>\n";
    svg << "<text transform=\"translate(16," << top + plot_h / 2
        << ") rotate(-90)\" text-anchor=\"middle\">test accuracy</text>\n";

    for (std::size_t k = 0; k < curves.size(); ++k) {
        const auto& c = curves[k];
        const char* color = palette[k % 5];
        if (!c.mean.empty()) {
            svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
            for (std::size_t t = 0; t < c.mean.size(); ++t)
                svg << fixed(px(t), 2) << ',' << fixed(py(c.mean[t] + c.standard_error[t]), 2) << ' ';
            for (std::size_t t = c.mean.size(); t-- > 0;)
                svg << fixed(px(t), 2) << ',' << fixed(py(c.mean[t] - c.standard_error[t]), 2) << ' ';
            svg << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
            for (std::size_t t = 0; t < c.mean.size(); ++t)
                svg << fixed(px(t), 2) << ',' << fixed(py(c.mean[t]), 2) << ' ';
            svg << "\"/>\n";
            for (std::size_t t = 0; t < c.mean.size(); ++t)
                svg << "<circle cx=\"" << fixed(px(t), 2) << "\" cy=\"" << fixed(py(c.mean[t]), 2) << "\" r=\"3\" fill=\""
                    << color << "\"/>";
            svg << '\n';
        }
        const double ly = top + 10 + 20.0 * static_cast<double>(k);
        svg << "<line x1=\"" << width - right + 15 << "\" x2=\"" << width - right + 35 << "\" y1=\"" << ly << "\" y2=\""
            << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
        svg << "<text x=\"" << width - right + 40 << "\" y=\"" << ly + 4 << "\">" << objective_name(c.objective)
            << " (n=" << c.seeds_ok << ")</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / name).string());
        out << text;
    };
    write("results.json", result_to_json(result).dump(2) + "\n");
    write("accuracy.csv", accuracy_csv(result));
    write("learning_curve.svg", learning_curve_svg(result));
}

}  // namespace streamsift
