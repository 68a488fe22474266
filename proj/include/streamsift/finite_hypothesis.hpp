#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "streamsift/model.hpp"

namespace streamsift {

/// A finite set of hypotheses theta_1..theta_K, each a conditional predictive p(y|x, theta_j).
class HypothesisSet {
public:
    virtual ~HypothesisSet() = default;
    virtual std::size_t num_hypotheses() const = 0;
    virtual std::size_t num_classes() const = 0;
    /// K x C matrix of conditionals at x.
    virtual Eigen::MatrixXd conditionals(std::span<const double> x) const = 0;
};

/// Hypotheses given as explicit tables over a finite input grid.
/// Inputs are matched against grid points on their first `key_dims` coordinates
/// (all coordinates when key_dims is 0); an input matching no grid point raises LookupError.
class TabularHypotheses : public HypothesisSet {
public:
    /// tables[j][g] is p(y | grid[g], theta_j).
    TabularHypotheses(std::vector<Features> grid, std::vector<std::vector<std::vector<double>>> tables,
                      std::size_t key_dims = 0);

    std::size_t num_hypotheses() const override { return tables_.size(); }
    std::size_t num_classes() const override { return num_classes_; }
    Eigen::MatrixXd conditionals(std::span<const double> x) const override;

    std::size_t lookup(std::span<const double> x) const;

private:
    std::vector<Features> grid_;
    std::vector<std::vector<std::vector<double>>> tables_;
    std::size_t num_classes_ = 0;
    std::size_t key_dims_ = 0;
};

/// Exact Bayesian model over a finite hypothesis set. Its "posterior samples" are the whole
/// weighted enumeration, so likelihood reweighting is exact Bayes.
class FiniteHypothesisModel : public Model {
public:
    FiniteHypothesisModel(std::shared_ptr<const HypothesisSet> hypotheses, std::vector<double> prior);

    /// Uniform prior.
    explicit FiniteHypothesisModel(std::shared_ptr<const HypothesisSet> hypotheses);

    std::string kind() const override { return "finite_hypothesis"; }
    std::size_t num_classes() const override { return hypotheses_->num_classes(); }
    std::size_t num_samples() const override { return hypotheses_->num_hypotheses(); }

    /// Posterior = prior x product of likelihoods, computed in log space.
    /// Throws DegenerateEvidenceError when every hypothesis assigns the data zero probability.
    void fit(std::span<const LabelledExample> data) override;

    PredictiveEnsemble ensemble_predict(std::span<const double> x) const override;
    std::unique_ptr<Model> clone() const override { return std::make_unique<FiniteHypothesisModel>(*this); }

    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    const HypothesisSet& hypotheses() const noexcept { return *hypotheses_; }

    /// Copy restricted to hypotheses whose posterior weight is at least
    /// `min_relative_weight` times the largest weight, renormalized. Used to speed up
    /// evaluation once the posterior has concentrated; prior and weights both restrict.
    FiniteHypothesisModel pruned(double min_relative_weight) const;

private:
    std::shared_ptr<const HypothesisSet> hypotheses_;
    Eigen::VectorXd prior_;
    Eigen::VectorXd weights_;
};

}  // namespace streamsift
