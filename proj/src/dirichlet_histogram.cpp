#include "streamsift/dirichlet_histogram.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "streamsift/errors.hpp"
#include "streamsift/random.hpp"

namespace streamsift {

DirichletHistogramClassifier::DirichletHistogramClassifier(DirichletHistogramConfig config)
    : config_(std::move(config)) {
    if (config_.lower.empty() || config_.lower.size() != config_.upper.size())
        throw ValidationError("DirichletHistogramClassifier: bounding box dimensions disagree");
    for (std::size_t d = 0; d < config_.lower.size(); ++d)
        if (!(config_.upper[d] > config_.lower[d]))
            throw ValidationError("DirichletHistogramClassifier: empty bounding box along dimension " +
                                  std::to_string(d));
    if (config_.bins_per_dim == 0) throw ValidationError("DirichletHistogramClassifier: bins_per_dim must be positive");
    if (config_.num_classes < 2) throw ValidationError("DirichletHistogramClassifier: need at least 2 classes");
    if (!(config_.alpha0 > 0.0)) throw DomainError("DirichletHistogramClassifier: alpha0 must be positive");
    if (config_.num_samples == 0) throw ValidationError("DirichletHistogramClassifier: need at least one sample");

    std::size_t bins = 1;
    for (std::size_t d = 0; d < config_.lower.size(); ++d) bins *= config_.bins_per_dim;
    concentrations_.assign(bins, std::vector<double>(config_.num_classes, config_.alpha0));
}

std::size_t DirichletHistogramClassifier::bin_of(std::span<const double> x) const {
    if (x.size() != config_.lower.size()) throw ValidationError("DirichletHistogramClassifier: wrong feature dimension");
    std::size_t bin = 0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (!(x[d] >= config_.lower[d] && x[d] <= config_.upper[d]))
            throw ValidationError("DirichletHistogramClassifier: input outside the bounding box");
        const double u = (x[d] - config_.lower[d]) / (config_.upper[d] - config_.lower[d]);
        auto idx = static_cast<std::size_t>(u * static_cast<double>(config_.bins_per_dim));
        if (idx >= config_.bins_per_dim) idx = config_.bins_per_dim - 1;
        bin = bin * config_.bins_per_dim + idx;
    }
    return bin;
}

std::span<const double> DirichletHistogramClassifier::concentrations(std::size_t bin) const {
    if (bin >= concentrations_.size()) throw ValidationError("DirichletHistogramClassifier: bin index out of range");
    return concentrations_[bin];
}

void DirichletHistogramClassifier::fit(std::span<const LabelledExample> data) {
    validate_dataset(data, config_.num_classes);
    for (auto& alpha : concentrations_) std::fill(alpha.begin(), alpha.end(), config_.alpha0);
    for (const auto& e : data) concentrations_[bin_of(e.features)][static_cast<std::size_t>(e.label)] += 1.0;
}

PredictiveEnsemble DirichletHistogramClassifier::ensemble_predict(std::span<const double> x) const {
    const std::size_t bin = bin_of(x);
    const auto& alpha = concentrations_[bin];
    const auto k = static_cast<Eigen::Index>(config_.num_samples);
    const auto c = static_cast<Eigen::Index>(config_.num_classes);

    // Draws depend on the concentrations, so hash them in too: refits that change a bin
    // produce fresh samples, refits that leave it alone reproduce the same ones.
    std::uint64_t tag = bin;
    for (double a : alpha) tag = mix64(tag ^ static_cast<std::uint64_t>(a * 1024.0));
    Rng rng = make_rng(config_.seed, {tag});

    PredictiveEnsemble out{Eigen::MatrixXd(k, c), Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k))};
    for (Eigen::Index j = 0; j < k; ++j) {
        double total = 0.0;
        for (Eigen::Index y = 0; y < c; ++y) {
            std::gamma_distribution<double> gamma(alpha[static_cast<std::size_t>(y)], 1.0);
            double g = gamma(rng);
            // Tiny concentrations can underflow to an all-zero draw.
            if (g < 1e-300) g = 1e-300;
            out.conditionals(j, y) = g;
            total += g;
        }
        out.conditionals.row(j) /= total;
    }
    return out;
}

Categorical DirichletHistogramClassifier::exact_posterior_predictive(std::span<const double> x) const {
    return Categorical::from_masses(concentrations_[bin_of(x)]);
}

std::optional<Categorical> DirichletHistogramClassifier::exact_predictive_after_update(
    std::span<const double> x, std::size_t y, std::span<const double> x_star) const {
    if (y >= config_.num_classes) throw ValidationError("DirichletHistogramClassifier: label out of range");
    auto alpha = concentrations_[bin_of(x_star)];
    if (bin_of(x) == bin_of(x_star)) alpha[y] += 1.0;
    return Categorical::from_masses(std::move(alpha));
}

double DirichletHistogramClassifier::parameter_kl_of_update(std::span<const double> x, std::size_t y) const {
    if (y >= config_.num_classes) throw ValidationError("DirichletHistogramClassifier: label out of range");
    const auto& alpha = concentrations_[bin_of(x)];
    auto post = alpha;
    post[y] += 1.0;
    return dirichlet_kl(post, alpha);
}

}  // namespace streamsift
