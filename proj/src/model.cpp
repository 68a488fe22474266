#include "streamsift/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "streamsift/errors.hpp"

namespace streamsift {

void validate_dataset(std::span<const LabelledExample> data, std::size_t num_classes) {
    if (data.empty()) return;
    const std::size_t dim = data.front().features.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].features.size() != dim)
            throw ValidationError("example " + std::to_string(i) + ": feature dimension " +
                                  std::to_string(data[i].features.size()) + " != " + std::to_string(dim));
        if (data[i].label < 0 || (num_classes > 0 && static_cast<std::size_t>(data[i].label) >= num_classes))
            throw ValidationError("example " + std::to_string(i) + ": label " + std::to_string(data[i].label) +
                                  " out of range");
    }
}

std::size_t infer_num_classes(std::span<const LabelledExample> data) {
    int top = -1;
    for (const auto& e : data) top = std::max(top, e.label);
    return static_cast<std::size_t>(top + 1);
}

std::vector<Features> features_of(std::span<const LabelledExample> data) {
    std::vector<Features> out;
    out.reserve(data.size());
    for (const auto& e : data) out.push_back(e.features);
    return out;
}

void PredictiveEnsemble::validate() const {
    if (conditionals.rows() < 1 || conditionals.rows() != weights.size())
        throw ValidationError("PredictiveEnsemble: weights and conditionals disagree on K");
    if (conditionals.cols() < 2) throw ValidationError("PredictiveEnsemble: need at least 2 classes");
    if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > kSumTolerance)
        throw ValidationError("PredictiveEnsemble: weights must be non-negative and sum to 1");
    for (Eigen::Index j = 0; j < conditionals.rows(); ++j) {
        if ((conditionals.row(j).array() < 0.0).any() || std::abs(conditionals.row(j).sum() - 1.0) > kSumTolerance)
            throw ValidationError("PredictiveEnsemble: row " + std::to_string(j) + " is not a distribution");
    }
}

Categorical PredictiveEnsemble::marginal() const {
    const Eigen::VectorXd m = conditionals.transpose() * weights;
    return Categorical::from_masses(std::vector<double>(m.data(), m.data() + m.size()));
}

PredictiveEnsemble reweight_ensemble(const PredictiveEnsemble& ensemble, std::span<const double> likelihoods) {
    if (likelihoods.size() != ensemble.num_samples())
        throw ValidationError("reweight_ensemble: need one likelihood per sample");
    Eigen::VectorXd w(ensemble.weights.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (!(likelihoods[j] >= 0.0)) throw ValidationError("reweight_ensemble: likelihoods must be non-negative");
        w[j] = ensemble.weights[j] * likelihoods[j];
    }
    const double total = w.sum();
    if (!(total > 0.0)) throw DegenerateEvidenceError("observation has zero probability under every sample");
    return {ensemble.conditionals, w / total};
}

PredictiveEnsemble reweight_ensemble(const PredictiveEnsemble& ensemble, const PredictiveEnsemble& observed,
                                     std::size_t label) {
    if (label >= observed.num_classes()) throw ValidationError("reweight_ensemble: label out of range");
    const Eigen::VectorXd lik = observed.conditionals.col(static_cast<Eigen::Index>(label));
    return reweight_ensemble(ensemble, std::span<const double>(lik.data(), static_cast<std::size_t>(lik.size())));
}

PredictiveEnsemble EnsembleBatch::at(std::size_t n) const {
    const auto c = static_cast<Eigen::Index>(num_classes);
    return {conditionals.middleCols(static_cast<Eigen::Index>(n) * c, c), weights};
}

EnsembleBatch Model::predict_batch(std::span<const Features> xs) const {
    EnsembleBatch batch;
    batch.num_classes = num_classes();
    const auto c = static_cast<Eigen::Index>(batch.num_classes);
    batch.conditionals.resize(static_cast<Eigen::Index>(num_samples()), c * static_cast<Eigen::Index>(xs.size()));
    for (std::size_t n = 0; n < xs.size(); ++n) {
        auto e = ensemble_predict(xs[n]);
        if (n == 0) batch.weights = e.weights;
        batch.conditionals.middleCols(static_cast<Eigen::Index>(n) * c, c) = e.conditionals;
    }
    if (xs.empty()) batch.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(num_samples()),
                                                              1.0 / static_cast<double>(num_samples()));
    return batch;
}

Categorical Model::marginal_predict(std::span<const double> x) const { return ensemble_predict(x).marginal(); }

Categorical posterior_predictive_after_update(const Model& model, std::span<const double> x, std::size_t y,
                                              std::span<const double> x_star) {
    if (y >= model.num_classes()) throw ValidationError("posterior_predictive_after_update: label out of range");
    const auto at_x = model.ensemble_predict(x);
    const auto updated = reweight_ensemble(model.ensemble_predict(x_star), at_x, y);
    return updated.marginal();
}

std::size_t predict_label(const Model& model, std::span<const double> x) { return model.marginal_predict(x).argmax(); }

}  // namespace streamsift
