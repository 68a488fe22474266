#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "streamsift/demo.hpp"
#include "streamsift/random.hpp"

using namespace streamsift;

namespace {

struct Fixture {
    TwoBellsProblem problem = two_bells_problem(3);
    FiniteHypothesisModel model = two_bells_model(problem, 3, 1500);
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

std::vector<double> csv_values(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> out;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) out.push_back(cell == "NaN" ? std::nan("") : std::stod(cell));
    }
    return out;
}

/// fill-opacity of each heatmap cell in document order; hatched cells read as -1.
std::vector<double> svg_levels(const std::string& svg) {
    std::vector<double> out;
    const std::regex cell(R"re(<rect x="[^"]+" y="[^"]+" width="[^"]+" height="[^"]+" (fill="black" fill-opacity="([^"]+)"|fill="url\(#hatch\)")/>)re");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), cell); it != std::sregex_iterator(); ++it)
        out.push_back((*it)[2].matched ? std::stod((*it)[2].str()) : -1.0);
    return out;
}

std::size_t first_argmax(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] <= v[best]) && !std::isnan(v[i])) best = i;
    return best;
}

}  // namespace

TEST_CASE("two bells labels") {
    const auto& p = fixture().problem;
    CHECK(p.y_true(p.means[0]) == 0);
    CHECK(p.y_true(p.means[1]) == 1);
    for (const auto& x : std::vector<Features>{{0.3, 2.0}, {-3.0, -1.0}, {0.0, 0.0}}) CHECK(p.y_flip(x) == 1 - p.y_true(x));
    CHECK(p.y_true(Features{0.0, 5.0}) == 0);
    CHECK(p.sample_targets(20, 4) == p.sample_targets(20, 4));
    CHECK(p.sample_targets(20, 4) != p.sample_targets(20, 5));
    for (const auto& e : p.training) {
        CHECK(e.features[1] < 0.0);
        CHECK(e.label == p.y_true(e.features));
    }
}

TEST_CASE("fitted demo model follows the training labels") {
    const auto& f = fixture();
    std::size_t correct = 0;
    for (const auto& e : f.problem.training) correct += static_cast<int>(predict_label(f.model, e.features)) == e.label;
    CHECK(correct == f.problem.training.size());
}

TEST_CASE("resolution 1 grids equal point evaluations") {
    const auto& f = fixture();
    HeatmapOptions opts;
    opts.resolution = 1;
    opts.num_targets = 32;
    const auto grids = render_heatmaps(f.model, f.problem, opts);
    REQUIRE(grids.size() == 5);
    const Features x = grids[0].cell_center(0, 0);
    CHECK(x == Features{0.0, 0.0});
    const TargetSet targets{f.problem.sample_targets(32, derive_seed(opts.seed, {1}))};
    const auto y = static_cast<std::size_t>(f.problem.y_true(x));
    for (const auto& g : grids) REQUIRE(g.values.size() == 1);
    CHECK(grids[0].values[0] == doctest::Approx(epig(f.model, x, targets)).epsilon(1e-12));
    CHECK(grids[1].values[0] == doctest::Approx(la_epig(f.model, x, y, targets)).epsilon(1e-12));
    CHECK(grids[2].values[0] == doctest::Approx(la_epig(f.model, x, 1 - y, targets)).epsilon(1e-12));
    CHECK(grids[3].values[0] == doctest::Approx(mic(f.model, x, y)).epsilon(1e-12));
    CHECK(grids[4].values[0] == doctest::Approx(mic(f.model, x, 1 - y)).epsilon(1e-12));
}

TEST_CASE("directional checks at low resolution") {
    const auto& f = fixture();
    HeatmapOptions opts;
    opts.resolution = 16;
    opts.num_targets = 64;
    const auto grids = render_heatmaps(f.model, f.problem, opts);
    const auto checks = check_heatmaps(f.model, f.problem, grids, opts);
    CHECK(checks.epig_nonnegative);
    CHECK(checks.epig_label_free);
    CHECK(checks.la_epig_true_mean > checks.la_epig_flipped_mean);
    CHECK(checks.mic_far_mean > checks.mic_near_mean);
    if (!checks.flipped_has_negative) MESSAGE("flipped-label LA-EPIG grid has no negative cell");

    for (const auto& g : grids) {
        CAPTURE(g.file_stem());
        const auto values = csv_values(grid_csv(g));
        CHECK(values.size() == 256);
        const auto levels = svg_levels(grid_svg(g));
        REQUIRE(levels.size() == 256);
        CHECK(first_argmax(values) == first_argmax(levels));
        CHECK(*std::max_element(levels.begin(), levels.end()) == 1.0);
    }
}

TEST_CASE("grid csv and svg formats") {
    ScoreGrid g;
    g.xmin = -1;
    g.xmax = 1;
    g.ymin = -2;
    g.ymax = 2;
    g.resolution = 2;
    g.values = {0.5, std::nan(""), -0.25, 1.0};
    g.objective = Objective::la_epig;
    g.label_mode = LabelMode::flipped;
    CHECK(grid_csv(g) == "# -1 1 -2 2 2 la_epig flipped\n0.5,NaN\n-0.25,1\n");
    CHECK(g.file_stem() == "la_epig_flipped");
    CHECK(g.cell_center(0, 0) == Features{-0.5, 1.0});
    CHECK(g.cell_center(1, 1) == Features{0.5, -1.0});

    const std::string svg = grid_svg(g);
    const auto levels = svg_levels(svg);
    CHECK(levels == std::vector<double>{0.6, -1.0, 0.0, 1.0});
    CHECK(svg.find("max 1<") != std::string::npos);
    CHECK(svg.find("min -0.25<") != std::string::npos);
    CHECK(svg.find("pattern id=\"hatch\"") != std::string::npos);
}
