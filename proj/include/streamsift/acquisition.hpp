#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "streamsift/ensemble.hpp"
#include "streamsift/example.hpp"
#include "streamsift/model.hpp"

namespace streamsift {

enum class Objective { random, mic, epig, la_epig, rho_loss };

/// Accepts "random", "mic", "epig", "la_epig", "rho_loss"; throws ConfigError otherwise.
Objective parse_objective(std::string_view name);
std::string_view objective_name(Objective objective);
/// Whether the objective reads the candidate's label.
bool objective_uses_labels(Objective objective);

/// Inputs drawn from the target input distribution p*(x*).
struct TargetSet {
    std::vector<Features> inputs;

    std::size_t size() const noexcept { return inputs.size(); }
    /// Throws ValidationError when empty or of mixed dimension.
    void validate() const;
};

/// H[p(y*|x*)] - H[p(y*|x*, x, y)]. May be negative.
double predictive_ig(const Model& model, std::span<const double> x, std::size_t y, std::span<const double> x_star);

/// Mean predictive IG over the target set, with the updated predictive obtained by
/// reweighting the model's samples on (x, y).
double la_epig(const Model& model, std::span<const double> x, std::size_t y, const TargetSet& targets);

/// Mean over targets of the mutual information of the plug-in joint
/// p(y, y*|x, x*) = sum_j w_j p(y|x, theta_j) p(y*|x*, theta_j). Never negative.
double epig(const Model& model, std::span<const double> x, const TargetSet& targets);

/// -log p(y|x) + eta * log p(y|x, after updating on (x, y)). Uses the model's closed-form
/// predictives when it has them, reweighting otherwise.
double mic(const Model& model, std::span<const double> x, std::size_t y, double eta = 1.0);

/// -log p_model(y|x) + log p_aux(y|x).
double rho_loss(const Model& model, const Model& aux_model, std::span<const double> x, std::size_t y);

struct AcquisitionScore {
    std::size_t candidate_index = 0;
    double value = 0.0;
};

struct ScoreOptions {
    double eta = 1.0;
    const Model* aux_model = nullptr;  // required by rho_loss
    std::size_t workers = 1;
};

struct ScoreReport {
    /// Descending by value; ties go to the lowest candidate index.
    std::vector<AcquisitionScore> ranked;
    /// Score of candidate i at position i; -inf marks degenerate candidates.
    std::vector<double> values;
    /// Candidates whose observation had zero probability under every sample.
    std::vector<std::size_t> degenerate;
    /// Number of target inputs pushed through the model.
    std::size_t target_evaluations = 0;
    /// Number of candidate inputs pushed through the model.
    std::size_t candidate_evaluations = 0;

    std::size_t best() const { return ranked.front().candidate_index; }
};

/// Scores every candidate in the pool. Deterministic given the seed and independent of
/// the worker count. "random" assigns seeded uniform scores without touching the model.
ScoreReport score_pool(Objective objective, const Model& model, std::span<const LabelledExample> pool,
                       const TargetSet& targets, std::uint64_t seed, const ScoreOptions& options = {});

/// Sorts scores descending with ties to the lowest index.
std::vector<AcquisitionScore> rank_scores(std::span<const double> values);

}  // namespace streamsift
