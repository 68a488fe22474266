#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "streamsift/prob.hpp"

namespace streamsift {

/// K weighted posterior samples, each inducing a conditional predictive p(y|x, theta_j).
/// Uniform weights give the usual Monte Carlo estimator; non-uniform weights carry an
/// exact enumeration of a finite hypothesis set.
struct PredictiveEnsemble {
    Eigen::MatrixXd conditionals;  // K x C, row j is p(y|x, theta_j)
    Eigen::VectorXd weights;       // K, sums to 1

    std::size_t num_samples() const noexcept { return static_cast<std::size_t>(conditionals.rows()); }
    std::size_t num_classes() const noexcept { return static_cast<std::size_t>(conditionals.cols()); }

    /// Throws ValidationError when a row or the weights are not normalized.
    void validate() const;

    /// weights . conditionals
    Categorical marginal() const;
};

/// Add-one-in reweighting: w_j <- w_j * lik_j / sum_k w_k * lik_k, conditionals untouched.
/// `likelihoods[j]` is p(y' = y | x, theta_j) for the observed pair.
/// Throws DegenerateEvidenceError when the observation has zero mass under every sample.
PredictiveEnsemble reweight_ensemble(const PredictiveEnsemble& ensemble, std::span<const double> likelihoods);

/// Same, reading the likelihoods from column `label` of `observed` (the ensemble at x).
PredictiveEnsemble reweight_ensemble(const PredictiveEnsemble& ensemble, const PredictiveEnsemble& observed,
                                     std::size_t label);

/// Predictions of the same K samples at N inputs, packed as K x (N*C); columns
/// [n*C, (n+1)*C) hold the conditionals at input n.
struct EnsembleBatch {
    Eigen::VectorXd weights;
    Eigen::MatrixXd conditionals;
    std::size_t num_classes = 0;

    std::size_t num_samples() const noexcept { return static_cast<std::size_t>(weights.size()); }
    std::size_t num_inputs() const noexcept {
        return num_classes == 0 ? 0 : static_cast<std::size_t>(conditionals.cols()) / num_classes;
    }
    PredictiveEnsemble at(std::size_t n) const;
};

}  // namespace streamsift
