#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "streamsift/acquisition.hpp"
#include "streamsift/finite_hypothesis.hpp"

namespace streamsift {

/// Two isotropic Gaussian bells, one per class, with equal mixing weights.
struct TwoBellsProblem {
    std::array<Features, 2> means{Features{-1.5, 0.0}, Features{1.5, 0.0}};
    double sigma = 0.8;
    /// Bounding box of the heatmaps: {xmin, xmax, ymin, ymax}.
    std::array<double, 4> box{-4.0, 4.0, -3.0, 3.0};
    Dataset training;

    /// Class with the higher posterior under the generative mixture; ties go to class 0.
    int y_true(std::span<const double> x) const;
    int y_flip(std::span<const double> x) const { return 1 - y_true(x); }
    /// Seeded draws from the mixture p_*(x).
    std::vector<Features> sample_targets(std::size_t count, std::uint64_t seed) const;
};

/// The default problem: a small training set drawn from the bells but only where x2 < 0,
/// labelled by y_true.
TwoBellsProblem two_bells_problem(std::uint64_t seed, std::size_t training_size = 16);

/// p(y = 1 | x) = sigmoid(b + sum_r a_r exp(-|x - c_r|^2 / (2 l^2))) for seeded centers c_r,
/// amplitudes a_r and bias b; one such function per hypothesis.
class RbfLogisticHypotheses : public HypothesisSet {
public:
    RbfLogisticHypotheses(std::size_t count, const std::array<double, 4>& box, std::uint64_t seed,
                          std::size_t centers = 8, double length_scale = 1.2, double amplitude = 4.0);

    std::size_t num_hypotheses() const override { return bias_.size(); }
    std::size_t num_classes() const override { return 2; }
    Eigen::MatrixXd conditionals(std::span<const double> x) const override;

private:
    Eigen::MatrixXd cx_, cy_, amp_;  // hypotheses x centers
    Eigen::VectorXd bias_;
    double length_scale_;
};

/// Exact-Bayes model over the RBF-logistic family, fitted on the training set and pruned.
FiniteHypothesisModel two_bells_model(const TwoBellsProblem& problem, std::uint64_t seed,
                                      std::size_t family_size = 4000);

enum class LabelMode { none, true_label, flipped };
std::string_view label_mode_name(LabelMode mode);

struct ScoreGrid {
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    std::size_t resolution = 0;
    /// Row-major, row 0 at ymax (top of the picture), column 0 at xmin. NaN marks masked cells.
    std::vector<double> values;
    Objective objective = Objective::epig;
    LabelMode label_mode = LabelMode::none;

    /// Center of cell (row, col).
    Features cell_center(std::size_t row, std::size_t col) const;
    std::string file_stem() const;
};

struct HeatmapOptions {
    std::size_t resolution = 64;
    std::size_t num_targets = 256;
    double eta = 1.0;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

/// EPIG, LA-EPIG (true, flipped) and MIC (true, flipped) over the problem's box.
std::vector<ScoreGrid> render_heatmaps(const Model& model, const TwoBellsProblem& problem,
                                       const HeatmapOptions& options);

/// Header line "# xmin xmax ymin ymax resolution objective label_mode", then one line per row.
std::string grid_csv(const ScoreGrid& grid);
/// Grayscale heatmap, darker = higher, min-max normalized per grid, hatched masked cells, colorbar.
std::string grid_svg(const ScoreGrid& grid);

/// Writes <stem>.csv and <stem>.svg for every grid; returns the paths written.
std::vector<std::filesystem::path> write_heatmaps(const std::vector<ScoreGrid>& grids,
                                                  const std::filesystem::path& dir);

/// Directional checks on a set of rendered grids.
struct DemoChecks {
    bool epig_nonnegative = false;
    bool epig_label_free = false;
    double la_epig_true_mean = 0, la_epig_flipped_mean = 0;
    double mic_far_mean = 0, mic_near_mean = 0;
    bool flipped_has_negative = false;
};

/// `far_radius` splits cells by distance to the nearest training input.
DemoChecks check_heatmaps(const Model& model, const TwoBellsProblem& problem, const std::vector<ScoreGrid>& grids,
                          const HeatmapOptions& options, double far_radius = 1.5);

}  // namespace streamsift
