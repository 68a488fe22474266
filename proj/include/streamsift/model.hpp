#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamsift/ensemble.hpp"
#include "streamsift/example.hpp"
#include "streamsift/prob.hpp"

namespace streamsift {

/// A stochastic predictive model p(y|x) = E_{p(theta)}[p(y|x, theta)] exposed through
/// a fixed set of K weighted parameter samples.
///
/// fit() replaces the model state and needs exclusive access. The prediction methods are
/// const, deterministic between fits, and safe to call concurrently.
class Model {
public:
    virtual ~Model() = default;

    virtual std::string kind() const = 0;
    virtual std::size_t num_classes() const = 0;
    virtual std::size_t num_samples() const = 0;

    virtual void fit(std::span<const LabelledExample> data) = 0;

    virtual PredictiveEnsemble ensemble_predict(std::span<const double> x) const = 0;

    /// Defaults to looping over ensemble_predict; models override when batching is cheaper.
    virtual EnsembleBatch predict_batch(std::span<const Features> xs) const;

    /// weights . conditionals of ensemble_predict(x).
    virtual Categorical marginal_predict(std::span<const double> x) const;

    /// Closed-form predictive, for models that have one.
    virtual std::optional<Categorical> exact_predictive(std::span<const double>) const { return std::nullopt; }

    /// Closed-form predictive at x_star after conditioning on (x, y), for models that have one.
    virtual std::optional<Categorical> exact_predictive_after_update(std::span<const double>, std::size_t,
                                                                     std::span<const double>) const {
        return std::nullopt;
    }

    virtual std::unique_ptr<Model> clone() const = 0;
};

/// p(y*|x*, x, y) via likelihood reweighting of the samples evaluated at x and x_star.
Categorical posterior_predictive_after_update(const Model& model, std::span<const double> x, std::size_t y,
                                              std::span<const double> x_star);

/// Argmax of marginal_predict with ties to the lowest class.
std::size_t predict_label(const Model& model, std::span<const double> x);

}  // namespace streamsift
