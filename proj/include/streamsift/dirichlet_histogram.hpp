#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "streamsift/model.hpp"

namespace streamsift {

struct DirichletHistogramConfig {
    std::vector<double> lower;  // bounding box, one entry per feature dimension
    std::vector<double> upper;
    std::size_t bins_per_dim = 4;
    std::size_t num_classes = 2;
    double alpha0 = 1.0;
    std::size_t num_samples = 1000;
    std::uint64_t seed = 0;
};

/// Conjugate classifier: the bounding box is cut into a uniform grid of bins, each bin
/// carries an independent Dirichlet(alpha0, ..., alpha0) prior over class probabilities.
/// Posterior samples are K Dirichlet draws per bin, generated deterministically from (seed, bin).
class DirichletHistogramClassifier : public Model {
public:
    explicit DirichletHistogramClassifier(DirichletHistogramConfig config);

    std::string kind() const override { return "dirichlet"; }
    std::size_t num_classes() const override { return config_.num_classes; }
    std::size_t num_samples() const override { return config_.num_samples; }

    /// Resets every bin to the prior, then adds one count per example.
    void fit(std::span<const LabelledExample> data) override;

    PredictiveEnsemble ensemble_predict(std::span<const double> x) const override;
    std::unique_ptr<Model> clone() const override { return std::make_unique<DirichletHistogramClassifier>(*this); }

    std::optional<Categorical> exact_predictive(std::span<const double> x) const override {
        return exact_posterior_predictive(x);
    }
    std::optional<Categorical> exact_predictive_after_update(std::span<const double> x, std::size_t y,
                                                             std::span<const double> x_star) const override;

    /// Normalized concentrations of the bin containing x.
    Categorical exact_posterior_predictive(std::span<const double> x) const;

    /// KL(p(theta | data, x, y) || p(theta | data)); only the bin of x changes, so this is
    /// the Dirichlet KL of that bin.
    double parameter_kl_of_update(std::span<const double> x, std::size_t y) const;

    std::size_t num_bins() const noexcept { return concentrations_.size(); }
    /// Throws ValidationError for inputs outside the bounding box or of the wrong dimension.
    std::size_t bin_of(std::span<const double> x) const;
    std::span<const double> concentrations(std::size_t bin) const;

private:
    DirichletHistogramConfig config_;
    std::vector<std::vector<double>> concentrations_;
};

}  // namespace streamsift
