#include "streamsift/finite_hypothesis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "streamsift/errors.hpp"

namespace streamsift {

namespace {

/// Hypotheses of a base set restricted to a subset of indices.
class SubsetHypotheses : public HypothesisSet {
public:
    SubsetHypotheses(std::shared_ptr<const HypothesisSet> base, std::vector<Eigen::Index> keep)
        : base_(std::move(base)), keep_(std::move(keep)) {}

    std::size_t num_hypotheses() const override { return keep_.size(); }
    std::size_t num_classes() const override { return base_->num_classes(); }
    Eigen::MatrixXd conditionals(std::span<const double> x) const override {
        const Eigen::MatrixXd full = base_->conditionals(x);
        Eigen::MatrixXd out(static_cast<Eigen::Index>(keep_.size()), full.cols());
        for (std::size_t i = 0; i < keep_.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = full.row(keep_[i]);
        return out;
    }

private:
    std::shared_ptr<const HypothesisSet> base_;
    std::vector<Eigen::Index> keep_;
};

}  // namespace

TabularHypotheses::TabularHypotheses(std::vector<Features> grid, std::vector<std::vector<std::vector<double>>> tables,
                                     std::size_t key_dims)
    : grid_(std::move(grid)), tables_(std::move(tables)), key_dims_(key_dims) {
    if (grid_.empty() || tables_.empty()) throw ValidationError("TabularHypotheses: empty grid or hypothesis set");
    num_classes_ = tables_.front().empty() ? 0 : tables_.front().front().size();
    for (const auto& table : tables_) {
        if (table.size() != grid_.size())
            throw ValidationError("TabularHypotheses: every hypothesis needs one row per grid point");
        for (const auto& row : table) {
            if (row.size() != num_classes_) throw ValidationError("TabularHypotheses: inconsistent class count");
            Categorical check(row);
        }
    }
}

std::size_t TabularHypotheses::lookup(std::span<const double> x) const {
    for (std::size_t g = 0; g < grid_.size(); ++g) {
        const std::size_t dims = key_dims_ == 0 ? grid_[g].size() : key_dims_;
        if (x.size() < dims || (key_dims_ == 0 && x.size() != dims)) continue;
        bool match = true;
        for (std::size_t d = 0; d < dims && match; ++d) match = std::abs(x[d] - grid_[g][d]) <= 1e-12;
        if (match) return g;
    }
    throw LookupError("TabularHypotheses: input is not a grid point");
}

Eigen::MatrixXd TabularHypotheses::conditionals(std::span<const double> x) const {
    const std::size_t g = lookup(x);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(tables_.size()), static_cast<Eigen::Index>(num_classes_));
    for (std::size_t j = 0; j < tables_.size(); ++j)
        for (std::size_t c = 0; c < num_classes_; ++c)
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = tables_[j][g][c];
    return out;
}

FiniteHypothesisModel::FiniteHypothesisModel(std::shared_ptr<const HypothesisSet> hypotheses, std::vector<double> prior)
    : hypotheses_(std::move(hypotheses)) {
    if (!hypotheses_ || hypotheses_->num_hypotheses() == 0)
        throw ValidationError("FiniteHypothesisModel: empty hypothesis set");
    if (prior.size() != hypotheses_->num_hypotheses())
        throw ValidationError("FiniteHypothesisModel: need one prior weight per hypothesis");
    double total = 0.0;
    for (double p : prior) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("FiniteHypothesisModel: prior must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > kSumTolerance) throw ValidationError("FiniteHypothesisModel: prior must sum to 1");
    prior_ = Eigen::Map<const Eigen::VectorXd>(prior.data(), static_cast<Eigen::Index>(prior.size()));
    weights_ = prior_;
}

FiniteHypothesisModel::FiniteHypothesisModel(std::shared_ptr<const HypothesisSet> hypotheses)
    : FiniteHypothesisModel(hypotheses, std::vector<double>(hypotheses ? hypotheses->num_hypotheses() : 0,
                                                            hypotheses ? 1.0 / hypotheses->num_hypotheses() : 0.0)) {}

void FiniteHypothesisModel::fit(std::span<const LabelledExample> data) {
    validate_dataset(data, num_classes());
    Eigen::VectorXd log_w = prior_.array().log();
    for (const auto& example : data) {
        const Eigen::MatrixXd cond = hypotheses_->conditionals(example.features);
        log_w.array() += cond.col(example.label).array().log();
    }
    const double top = log_w.maxCoeff();
    if (!std::isfinite(top))
        throw DegenerateEvidenceError("FiniteHypothesisModel: data has zero probability under every hypothesis");
    Eigen::VectorXd w = (log_w.array() - top).exp();
    weights_ = w / w.sum();
}

PredictiveEnsemble FiniteHypothesisModel::ensemble_predict(std::span<const double> x) const {
    return {hypotheses_->conditionals(x), weights_};
}

FiniteHypothesisModel FiniteHypothesisModel::pruned(double min_relative_weight) const {
    const double cutoff = weights_.maxCoeff() * min_relative_weight;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < weights_.size(); ++j)
        if (weights_[j] >= cutoff && weights_[j] > 0.0) keep.push_back(j);

    std::vector<double> prior(keep.size());
    double prior_total = 0.0;
    for (std::size_t i = 0; i < keep.size(); ++i) prior_total += prior_[keep[i]];
    for (std::size_t i = 0; i < keep.size(); ++i) prior[i] = prior_[keep[i]] / prior_total;

    Eigen::VectorXd w(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) w[static_cast<Eigen::Index>(i)] = weights_[keep[i]];

    FiniteHypothesisModel out(std::make_shared<SubsetHypotheses>(hypotheses_, std::move(keep)), std::move(prior));
    out.weights_ = w / w.sum();
    return out;
}

}  // namespace streamsift
