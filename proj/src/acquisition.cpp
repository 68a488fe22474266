#include "streamsift/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "streamsift/errors.hpp"
#include "streamsift/parallel.hpp"
#include "streamsift/prob.hpp"
#include "streamsift/random.hpp"

namespace streamsift {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double block_entropy(const double* p, std::size_t n) { return kernels::entropy(std::span<const double>(p, n)); }

/// Target-side quantities shared by every candidate in one scoring call.
class TargetContext {
public:
    TargetContext(const Model& model, const TargetSet& targets) {
        targets.validate();
        batch_ = model.predict_batch(targets.inputs);
        classes_ = batch_.num_classes;
        prior_ = (batch_.conditionals.transpose() * batch_.weights).transpose();
        prior_entropy_.resize(targets.size());
        for (std::size_t i = 0; i < targets.size(); ++i)
            prior_entropy_[i] = block_entropy(prior_.data() + i * classes_, classes_);
        mean_prior_entropy_ = std::accumulate(prior_entropy_.begin(), prior_entropy_.end(), 0.0) /
                              static_cast<double>(targets.size());
    }

    std::size_t size() const noexcept { return prior_entropy_.size(); }

    /// LA-EPIG for a candidate whose conditionals at x form the K x C block `at_x`.
    template <typename Block>
    double la_epig(const Block& at_x, std::size_t y, const Eigen::VectorXd& weights) const {
        const Eigen::VectorXd scaled = weights.cwiseProduct(at_x.col(static_cast<Eigen::Index>(y)));
        const double evidence = scaled.sum();
        if (!(evidence > 0.0)) throw DegenerateEvidenceError("observation has zero probability under every sample");
        const Eigen::RowVectorXd updated = (batch_.conditionals.transpose() * scaled).transpose() / evidence;
        double post_entropy = 0.0;
        for (std::size_t i = 0; i < size(); ++i) post_entropy += block_entropy(updated.data() + i * classes_, classes_);
        return mean_prior_entropy_ - post_entropy / static_cast<double>(size());
    }

    /// EPIG for a candidate block `at_x`: mean over targets of I(y; y*) under the plug-in joint.
    template <typename Block>
    double epig(const Block& at_x, const Eigen::VectorXd& weights) const {
        const Eigen::MatrixXd weighted = weights.asDiagonal() * at_x;  // K x C
        const Eigen::RowVectorXd px = weighted.colwise().sum();
        const double hx = block_entropy(px.data(), static_cast<std::size_t>(px.size()));
        // joint(c, i*C + c') = sum_j w_j p(c|x, j) p(c'|x*_i, j); column-major storage makes
        // each target's C x C block contiguous.
        const Eigen::MatrixXd joint = weighted.transpose() * batch_.conditionals;
        const std::size_t block = classes_ * static_cast<std::size_t>(joint.rows());
        double total = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            const double hj = block_entropy(joint.data() + i * block, block);
            total += std::max(0.0, hx + prior_entropy_[i] - hj);
        }
        return total / static_cast<double>(size());
    }

    const Eigen::VectorXd& weights() const noexcept { return batch_.weights; }

private:
    EnsembleBatch batch_;
    std::size_t classes_ = 0;
    Eigen::RowVectorXd prior_;
    std::vector<double> prior_entropy_;
    double mean_prior_entropy_ = 0.0;
};

void check_label(const Model& model, std::size_t y) {
    if (y >= model.num_classes()) throw ValidationError("label " + std::to_string(y) + " out of range");
}

/// Weights must match between candidate and target batches: the same K samples are
/// evaluated at both.
void check_same_samples(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw ValidationError("candidate and target ensembles use different samples");
}

double mic_from_ensemble(const PredictiveEnsemble& at_x, std::size_t y, double eta) {
    const Eigen::VectorXd lik = at_x.conditionals.col(static_cast<Eigen::Index>(y));
    const double evidence = at_x.weights.dot(lik);
    if (!(evidence > 0.0)) throw DegenerateEvidenceError("zero predictive mass on the observed label");
    // Updated predictive at x itself: sum_j w_j lik_j^2 / sum_j w_j lik_j.
    const double updated = at_x.weights.dot(lik.cwiseProduct(lik)) / evidence;
    return -std::log(evidence) + eta * std::log(updated);
}

double mic_exact(const Categorical& before, const Categorical& after, std::size_t y, double eta) {
    if (!(before[y] > 0.0) || !(after[y] > 0.0))
        throw DegenerateEvidenceError("zero predictive mass on the observed label");
    return -std::log(before[y]) + eta * std::log(after[y]);
}

}  // namespace

Objective parse_objective(std::string_view name) {
    if (name == "random") return Objective::random;
    if (name == "mic") return Objective::mic;
    if (name == "epig") return Objective::epig;
    if (name == "la_epig") return Objective::la_epig;
    if (name == "rho_loss") return Objective::rho_loss;
    throw ConfigError("unknown objective \"" + std::string(name) + "\"", "objective.name");
}

std::string_view objective_name(Objective objective) {
    switch (objective) {
        case Objective::random: return "random";
        case Objective::mic: return "mic";
        case Objective::epig: return "epig";
        case Objective::la_epig: return "la_epig";
        case Objective::rho_loss: return "rho_loss";
    }
    return "unknown";
}

bool objective_uses_labels(Objective objective) {
    return objective == Objective::mic || objective == Objective::la_epig || objective == Objective::rho_loss;
}

void TargetSet::validate() const {
    if (inputs.empty()) throw ValidationError("TargetSet: need at least one target input");
    for (const auto& x : inputs)
        if (x.size() != inputs.front().size()) throw ValidationError("TargetSet: inconsistent dimensions");
}

double predictive_ig(const Model& model, std::span<const double> x, std::size_t y, std::span<const double> x_star) {
    check_label(model, y);
    const Categorical before = model.marginal_predict(x_star);
    const Categorical after = posterior_predictive_after_update(model, x, y, x_star);
    return kernels::entropy(before.probs()) - kernels::entropy(after.probs());
}

double la_epig(const Model& model, std::span<const double> x, std::size_t y, const TargetSet& targets) {
    check_label(model, y);
    const TargetContext context(model, targets);
    const auto at_x = model.ensemble_predict(x);
    check_same_samples(at_x.weights, context.weights());
    return context.la_epig(at_x.conditionals, y, at_x.weights);
}

double epig(const Model& model, std::span<const double> x, const TargetSet& targets) {
    const TargetContext context(model, targets);
    const auto at_x = model.ensemble_predict(x);
    check_same_samples(at_x.weights, context.weights());
    return context.epig(at_x.conditionals, at_x.weights);
}

double mic(const Model& model, std::span<const double> x, std::size_t y, double eta) {
    check_label(model, y);
    if (auto before = model.exact_predictive(x)) {
        auto after = model.exact_predictive_after_update(x, y, x);
        if (after) return mic_exact(*before, *after, y, eta);
    }
    return mic_from_ensemble(model.ensemble_predict(x), y, eta);
}

double rho_loss(const Model& model, const Model& aux_model, std::span<const double> x, std::size_t y) {
    check_label(model, y);
    check_label(aux_model, y);
    const double p = model.marginal_predict(x)[y];
    const double q = aux_model.marginal_predict(x)[y];
    if (!(p > 0.0) || !(q > 0.0)) throw DegenerateEvidenceError("zero predictive mass on the observed label");
    return -std::log(p) + std::log(q);
}

std::vector<AcquisitionScore> rank_scores(std::span<const double> values) {
    std::vector<AcquisitionScore> ranked(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) ranked[i] = {i, values[i]};
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const AcquisitionScore& a, const AcquisitionScore& b) { return a.value > b.value; });
    return ranked;
}

ScoreReport score_pool(Objective objective, const Model& model, std::span<const LabelledExample> pool,
                       const TargetSet& targets, std::uint64_t seed, const ScoreOptions& options) {
    if (pool.empty()) throw ValidationError("score_pool: empty pool");
    ScoreReport report;
    report.values.assign(pool.size(), 0.0);

    if (objective == Objective::random) {
        Rng rng = make_rng(seed, {0x5c0e});
        for (auto& v : report.values) v = uniform_unit(rng);
        report.ranked = rank_scores(report.values);
        return report;
    }
    if (objective == Objective::rho_loss && options.aux_model == nullptr)
        throw ConfigError("rho_loss needs an auxiliary model", "objective.name");
    if (objective_uses_labels(objective))
        for (const auto& e : pool) check_label(model, static_cast<std::size_t>(e.label));

    const std::vector<Features> inputs = features_of(pool);
    const std::size_t c = model.num_classes();
    const bool needs_targets = objective == Objective::epig || objective == Objective::la_epig;
    const bool exact_mic = objective == Objective::mic && model.exact_predictive(inputs.front()).has_value();

    std::optional<TargetContext> context;
    if (needs_targets) {
        context.emplace(model, targets);
        report.target_evaluations = targets.size();
    }

    EnsembleBatch batch;
    std::vector<double> aux_mass;
    if (!exact_mic) {
        batch = model.predict_batch(inputs);
        report.candidate_evaluations = inputs.size();
        if (context) check_same_samples(batch.weights, context->weights());
    }
    if (objective == Objective::rho_loss) {
        const EnsembleBatch aux = options.aux_model->predict_batch(inputs);
        const Eigen::RowVectorXd m = (aux.conditionals.transpose() * aux.weights).transpose();
        aux_mass.resize(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) aux_mass[i] = m[static_cast<Eigen::Index>(i * c + pool[i].label)];
    }

    std::vector<char> degenerate(pool.size(), 0);
    parallel_for(pool.size(), options.workers, [&](std::size_t i) {
        const auto y = static_cast<std::size_t>(pool[i].label);
        try {
            double value = 0.0;
            if (exact_mic) {
                value = mic(model, inputs[i], y, options.eta);
            } else {
                const auto block = batch.conditionals.middleCols(static_cast<Eigen::Index>(i * c),
                                                                 static_cast<Eigen::Index>(c));
                switch (objective) {
                    case Objective::epig: value = context->epig(block, batch.weights); break;
                    case Objective::la_epig: value = context->la_epig(block, y, batch.weights); break;
                    case Objective::mic: value = mic_from_ensemble(batch.at(i), y, options.eta); break;
                    case Objective::rho_loss: {
                        const double p = batch.weights.dot(block.col(static_cast<Eigen::Index>(y)));
                        if (!(p > 0.0) || !(aux_mass[i] > 0.0))
                            throw DegenerateEvidenceError("zero predictive mass on the observed label");
                        value = -std::log(p) + std::log(aux_mass[i]);
                        break;
                    }
                    case Objective::random: break;
                }
            }
            if (!std::isfinite(value)) throw DegenerateEvidenceError("non-finite score");
            report.values[i] = value;
        } catch (const DegenerateEvidenceError&) {
            report.values[i] = kNegInf;
            degenerate[i] = 1;
        }
    });

    for (std::size_t i = 0; i < pool.size(); ++i)
        if (degenerate[i]) report.degenerate.push_back(i);
    report.ranked = rank_scores(report.values);
    return report;
}

}  // namespace streamsift
