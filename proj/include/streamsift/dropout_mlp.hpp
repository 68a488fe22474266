#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "streamsift/model.hpp"

namespace streamsift {

struct MlpConfig {
    std::size_t num_classes = 2;
    std::vector<std::size_t> hidden = {128, 128, 128};
    double dropout = 0.1;
    double learning_rate = 0.01;
    double weight_decay = 1e-4;  // coefficient lambda of (lambda / 2) * ||params||^2
    std::size_t max_steps = 100000;
    double val_fraction = 0.1;
    std::size_t num_samples = 100;  // dropout masks used as posterior samples
    std::uint64_t seed = 0;
};

struct DenseLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;     // out
};

using MlpParameters = std::vector<DenseLayer>;

/// Per-hidden-layer dropout masks, N x H_l each, holding 0 or 1 / (1 - rate).
/// An empty vector means no dropout.
using DropoutMasks = std::vector<Eigen::MatrixXd>;

/// Mean NLL over the rows of `inputs` plus (weight_decay / 2) * ||params||^2, with
/// ReLU hidden layers, `masks` applied after each hidden activation and a softmax output.
/// Writes d(loss)/d(params) into `gradient` when non-null.
double mlp_loss(const MlpParameters& params, const Eigen::MatrixXd& inputs, std::span<const int> labels,
                const DropoutMasks& masks, double weight_decay, MlpParameters* gradient = nullptr);

/// Row-wise softmax outputs, N x C.
Eigen::MatrixXd mlp_forward(const MlpParameters& params, const Eigen::MatrixXd& inputs, const DropoutMasks& masks);

/// MC-dropout network. Posterior sample j is a fixed dropout mask drawn at fit time, so
/// sample j means the same sub-network at every input.
class DropoutMLP : public Model {
public:
    explicit DropoutMLP(MlpConfig config);

    std::string kind() const override { return "mlp"; }
    std::size_t num_classes() const override { return config_.num_classes; }
    std::size_t num_samples() const override { return config_.num_samples; }

    /// Re-initializes from the seed, holds out a seeded validation split
    /// (max(1, floor(val_fraction * n)) examples when n >= 2), runs full-batch gradient
    /// descent and restores the parameters with the lowest validation NLL.
    /// Throws TrainingDivergedError on a non-finite loss.
    void fit(std::span<const LabelledExample> data) override;

    PredictiveEnsemble ensemble_predict(std::span<const double> x) const override;
    EnsembleBatch predict_batch(std::span<const Features> xs) const override;
    std::unique_ptr<Model> clone() const override { return std::make_unique<DropoutMLP>(*this); }

    const MlpParameters& parameters() const noexcept { return params_; }
    /// Steps taken by the last fit and the step whose parameters were restored.
    std::size_t steps_run() const noexcept { return steps_run_; }
    std::size_t best_step() const noexcept { return best_step_; }

    /// Fresh parameters for a given input dimension, drawn from the seed (He initialization).
    MlpParameters initial_parameters(std::size_t input_dim) const;

private:
    void draw_inference_masks();

    MlpConfig config_;
    std::size_t input_dim_ = 0;
    MlpParameters params_;
    std::vector<std::vector<Eigen::RowVectorXd>> inference_masks_;  // [sample][hidden layer]
    std::size_t steps_run_ = 0;
    std::size_t best_step_ = 0;
};

}  // namespace streamsift
