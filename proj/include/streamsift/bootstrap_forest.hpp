#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "streamsift/model.hpp"

namespace streamsift {

struct ForestConfig {
    std::size_t num_classes = 2;
    std::size_t num_trees = 50;
    std::size_t max_depth = 8;
    std::size_t min_leaf = 1;
    double smoothing = 1.0;             // Laplace beta for leaf class frequencies
    std::size_t features_per_split = 0;  // 0 selects ceil(sqrt(D))
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Random forest whose trees act as posterior samples: tree j's conditional at x is the
/// smoothed class frequency (count_c + beta) / (n_leaf + beta C) of the leaf x falls in.
class BootstrapForest : public Model {
public:
    explicit BootstrapForest(ForestConfig config);

    std::string kind() const override { return "forest"; }
    std::size_t num_classes() const override { return config_.num_classes; }
    std::size_t num_samples() const override { return config_.num_trees; }

    /// Throws FitError on an empty training set.
    void fit(std::span<const LabelledExample> data) override;

    PredictiveEnsemble ensemble_predict(std::span<const double> x) const override;
    EnsembleBatch predict_batch(std::span<const Features> xs) const override;
    std::unique_ptr<Model> clone() const override { return std::make_unique<BootstrapForest>(*this); }

    const ForestConfig& config() const noexcept { return config_; }

private:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        std::vector<double> probs;  // leaves only
    };
    using Tree = std::vector<Node>;

    Tree grow_tree(std::span<const LabelledExample> data, std::vector<std::size_t> rows, std::uint64_t tree_seed) const;
    const Node& leaf_for(const Tree& tree, std::span<const double> x) const;

    ForestConfig config_;
    std::size_t dim_ = 0;
    std::vector<Tree> trees_;
};

}  // namespace streamsift
