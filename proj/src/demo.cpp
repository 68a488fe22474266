#include "streamsift/demo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "streamsift/io.hpp"
#include "streamsift/random.hpp"

namespace streamsift {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

Features draw_from_bell(const TwoBellsProblem& p, int label, Rng& rng) {
    std::normal_distribution<double> normal(0.0, p.sigma);
    const auto& mu = p.means[static_cast<std::size_t>(label)];
    return {mu[0] + normal(rng), mu[1] + normal(rng)};
}

}  // namespace

int TwoBellsProblem::y_true(std::span<const double> x) const {
    // Equal weights and covariances: the posterior favours the nearer mean.
    return squared_distance(x, means[1]) < squared_distance(x, means[0]) ? 1 : 0;
}

std::vector<Features> TwoBellsProblem::sample_targets(std::size_t count, std::uint64_t seed) const {
    Rng rng = make_rng(seed, {0x7a26e7});
    std::vector<Features> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(draw_from_bell(*this, uniform_unit(rng) < 0.5 ? 0 : 1, rng));
    return out;
}

TwoBellsProblem two_bells_problem(std::uint64_t seed, std::size_t training_size) {
    TwoBellsProblem p;
    Rng rng = make_rng(seed, {0xbe115});
    while (p.training.size() < training_size) {
        const int bell = static_cast<int>(p.training.size() % 2);
        Features x = draw_from_bell(p, bell, rng);
        if (x[1] >= 0.0) continue;  // training inputs come from the lower half only
        if (x[0] < p.box[0] || x[0] > p.box[1] || x[1] < p.box[2]) continue;
        const int y = p.y_true(x);
        p.training.push_back({std::move(x), y});
    }
    return p;
}

RbfLogisticHypotheses::RbfLogisticHypotheses(std::size_t count, const std::array<double, 4>& box, std::uint64_t seed,
                                             std::size_t centers, double length_scale, double amplitude)
    : cx_(count, centers), cy_(count, centers), amp_(count, centers), bias_(count), length_scale_(length_scale) {
    if (count == 0 || centers == 0) throw ValidationError("RbfLogisticHypotheses: empty family");
    if (!(length_scale > 0.0)) throw ValidationError("RbfLogisticHypotheses: length scale must be positive");
    Rng rng = make_rng(seed, {0x4bf});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t r = 0; r < centers; ++r) {
            const auto i = static_cast<Eigen::Index>(k), j = static_cast<Eigen::Index>(r);
            cx_(i, j) = box[0] + (box[1] - box[0]) * uniform_unit(rng);
            cy_(i, j) = box[2] + (box[3] - box[2]) * uniform_unit(rng);
            amp_(i, j) = amplitude * normal(rng);
        }
        bias_(static_cast<Eigen::Index>(k)) = normal(rng);
    }
}

Eigen::MatrixXd RbfLogisticHypotheses::conditionals(std::span<const double> x) const {
    if (x.size() != 2) throw ValidationError("RbfLogisticHypotheses: inputs must be 2-dimensional");
    const double inv = 1.0 / (2.0 * length_scale_ * length_scale_);
    const Eigen::ArrayXXd d2 = (cx_.array() - x[0]).square() + (cy_.array() - x[1]).square();
    const Eigen::ArrayXd logit = bias_.array() + ((-d2 * inv).exp() * amp_.array()).rowwise().sum();
    Eigen::MatrixXd out(bias_.size(), 2);
    out.col(1) = (1.0 / (1.0 + (-logit).exp())).matrix();
    out.col(0) = (1.0 - out.col(1).array()).matrix();
    return out;
}

FiniteHypothesisModel two_bells_model(const TwoBellsProblem& problem, std::uint64_t seed, std::size_t family_size) {
    auto family = std::make_shared<RbfLogisticHypotheses>(family_size, problem.box, seed);
    FiniteHypothesisModel model(family);
    model.fit(problem.training);
    return model.pruned(1e-6);
}

std::string_view label_mode_name(LabelMode mode) {
    switch (mode) {
        case LabelMode::none: return "none";
        case LabelMode::true_label: return "true";
        case LabelMode::flipped: return "flipped";
    }
    return "unknown";
}

Features ScoreGrid::cell_center(std::size_t row, std::size_t col) const {
    const double n = static_cast<double>(resolution);
    return {xmin + (static_cast<double>(col) + 0.5) * (xmax - xmin) / n,
            ymax - (static_cast<double>(row) + 0.5) * (ymax - ymin) / n};
}

std::string ScoreGrid::file_stem() const {
    return std::string(objective_name(objective)) + "_" + std::string(label_mode_name(label_mode));
}

std::vector<ScoreGrid> render_heatmaps(const Model& model, const TwoBellsProblem& problem,
                                       const HeatmapOptions& options) {
    if (options.resolution == 0) throw ConfigError("resolution must be positive", "resolution");
    ScoreGrid blank;
    blank.xmin = problem.box[0];
    blank.xmax = problem.box[1];
    blank.ymin = problem.box[2];
    blank.ymax = problem.box[3];
    blank.resolution = options.resolution;

    Dataset truth, flipped;
    for (std::size_t r = 0; r < options.resolution; ++r)
        for (std::size_t c = 0; c < options.resolution; ++c) {
            Features x = blank.cell_center(r, c);
            const int y = problem.y_true(x);
            truth.push_back({x, y});
            flipped.push_back({std::move(x), 1 - y});
        }
    const TargetSet targets{problem.sample_targets(options.num_targets, derive_seed(options.seed, {1}))};
    ScoreOptions score_opts;
    score_opts.eta = options.eta;
    score_opts.workers = options.workers;

    const std::vector<std::pair<Objective, LabelMode>> panels{{Objective::epig, LabelMode::none},
                                                              {Objective::la_epig, LabelMode::true_label},
                                                              {Objective::la_epig, LabelMode::flipped},
                                                              {Objective::mic, LabelMode::true_label},
                                                              {Objective::mic, LabelMode::flipped}};
    std::vector<ScoreGrid> grids;
    for (const auto& [objective, mode] : panels) {
        ScoreGrid g = blank;
        g.objective = objective;
        g.label_mode = mode;
        const Dataset& pool = mode == LabelMode::flipped ? flipped : truth;
        const auto report = score_pool(objective, model, pool, targets, derive_seed(options.seed, {2}), score_opts);
        g.values = report.values;
        for (auto& v : g.values)
            if (!std::isfinite(v)) v = std::numeric_limits<double>::quiet_NaN();
        grids.push_back(std::move(g));
    }
    return grids;
}

std::string grid_csv(const ScoreGrid& g) {
    std::ostringstream out;
    out << "# " << format_double(g.xmin) << ' ' << format_double(g.xmax) << ' ' << format_double(g.ymin) << ' '
        << format_double(g.ymax) << ' ' << g.resolution << ' ' << objective_name(g.objective) << ' '
        << label_mode_name(g.label_mode) << '\n';
    for (std::size_t r = 0; r < g.resolution; ++r) {
        for (std::size_t c = 0; c < g.resolution; ++c) {
            const double v = g.values[r * g.resolution + c];
            out << (c ? "," : "") << (std::isnan(v) ? std::string("NaN") : format_double(v));
        }
        out << '\n';
    }
    return out.str();
}

std::string grid_svg(const ScoreGrid& g) {
    const double cell = std::max(2.0, 512.0 / static_cast<double>(g.resolution));
    const double side = cell * static_cast<double>(g.resolution);
    const double margin = 20, bar_w = 20, bar_gap = 30, label_w = 90;
    const double width = margin + side + bar_gap + bar_w + label_w, height = side + 2 * margin + 20;

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : g.values)
        if (!std::isnan(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const bool any = lo <= hi;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">"
           "<rect width=\"6\" height=\"6\" fill=\"white\"/><path d=\"M0,6 L6,0\" stroke=\"#c03\" stroke-width=\"1\"/>"
           "</pattern>"
           "<linearGradient id=\"bar\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
           "<stop offset=\"0\" stop-color=\"white\"/><stop offset=\"1\" stop-color=\"black\"/></linearGradient></defs>\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << margin << "\" y=\"14\">" << objective_name(g.objective) << " (" << label_mode_name(g.label_mode)
        << ")</text>\n";
    for (std::size_t r = 0; r < g.resolution; ++r)
        for (std::size_t c = 0; c < g.resolution; ++c) {
            const double v = g.values[r * g.resolution + c];
            svg << "<rect x=\"" << margin + cell * static_cast<double>(c) << "\" y=\""
                << margin + cell * static_cast<double>(r) << "\" width=\"" << cell << "\" height=\"" << cell << "\" ";
            if (std::isnan(v)) {
                svg << "fill=\"url(#hatch)\"/>\n";
            } else {
                const double level = hi > lo ? (v - lo) / (hi - lo) : 0.0;
                svg << "fill=\"black\" fill-opacity=\"" << format_double(level) << "\"/>\n";
            }
        }
    svg << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << side << "\" height=\"" << side
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    const double bx = margin + side + bar_gap;
    svg << "<rect x=\"" << bx << "\" y=\"" << margin << "\" width=\"" << bar_w << "\" height=\"" << side
        << "\" fill=\"url(#bar)\" stroke=\"#444\"/>\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", any ? hi : 0.0);
    svg << "<text x=\"" << bx + bar_w + 6 << "\" y=\"" << margin + 10 << "\">max " << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", any ? lo : 0.0);
    svg << "<text x=\"" << bx + bar_w + 6 << "\" y=\"" << margin + side << "\">min " << buf << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::filesystem::path> write_heatmaps(const std::vector<ScoreGrid>& grids,
                                                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const auto& g : grids)
        for (const auto& [ext, text] : {std::pair{".csv", grid_csv(g)}, std::pair{".svg", grid_svg(g)}}) {
            const auto path = dir / (g.file_stem() + ext);
            std::ofstream out(path, std::ios::binary);
            if (!out) throw Error("cannot write " + path.string());
            out << text;
            written.push_back(path);
        }
    return written;
}

DemoChecks check_heatmaps(const Model& model, const TwoBellsProblem& problem, const std::vector<ScoreGrid>& grids,
                          const HeatmapOptions& options, double far_radius) {
    auto find = [&](Objective o, LabelMode m) -> const ScoreGrid& {
        for (const auto& g : grids)
            if (g.objective == o && g.label_mode == m) return g;
        throw ValidationError("missing heatmap " + std::string(objective_name(o)) + "_" +
                              std::string(label_mode_name(m)));
    };
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        std::size_t n = 0;
        for (double x : v)
            if (!std::isnan(x)) {
                s += x;
                ++n;
            }
        return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    };

    DemoChecks out;
    const ScoreGrid& epig = find(Objective::epig, LabelMode::none);
    out.epig_nonnegative = std::all_of(epig.values.begin(), epig.values.end(), [](double v) { return v >= 0.0; });

    // Rescore EPIG with flipped labels attached to the cells: the values must not move.
    Dataset flipped;
    for (std::size_t r = 0; r < epig.resolution; ++r)
        for (std::size_t c = 0; c < epig.resolution; ++c) {
            Features x = epig.cell_center(r, c);
            const int y = problem.y_flip(x);
            flipped.push_back({std::move(x), y});
        }
    const TargetSet targets{problem.sample_targets(options.num_targets, derive_seed(options.seed, {1}))};
    ScoreOptions score_opts;
    score_opts.workers = options.workers;
    const auto again = score_pool(Objective::epig, model, flipped, targets, derive_seed(options.seed, {2}), score_opts);
    out.epig_label_free = again.values == epig.values;

    const ScoreGrid& la_true = find(Objective::la_epig, LabelMode::true_label);
    const ScoreGrid& la_flip = find(Objective::la_epig, LabelMode::flipped);
    out.la_epig_true_mean = mean(la_true.values);
    out.la_epig_flipped_mean = mean(la_flip.values);
    out.flipped_has_negative = std::any_of(la_flip.values.begin(), la_flip.values.end(), [](double v) { return v < 0.0; });

    const ScoreGrid& mic = find(Objective::mic, LabelMode::true_label);
    std::vector<double> far, near;
    for (std::size_t r = 0; r < mic.resolution; ++r)
        for (std::size_t c = 0; c < mic.resolution; ++c) {
            const Features x = mic.cell_center(r, c);
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& e : problem.training) nearest = std::min(nearest, squared_distance(x, e.features));
            (std::sqrt(nearest) > far_radius ? far : near).push_back(mic.values[r * mic.resolution + c]);
        }
    out.mic_far_mean = mean(far);
    out.mic_near_mean = mean(near);
    return out;
}

}  // namespace streamsift
