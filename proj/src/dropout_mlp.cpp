#include "streamsift/dropout_mlp.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "streamsift/errors.hpp"
#include "streamsift/random.hpp"

namespace streamsift {

namespace {

Eigen::MatrixXd to_matrix(std::span<const LabelledExample> data, std::span<const std::size_t> rows) {
    const auto dim = static_cast<Eigen::Index>(data.front().features.size());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index d = 0; d < dim; ++d)
            m(static_cast<Eigen::Index>(i), d) = data[rows[i]].features[static_cast<std::size_t>(d)];
    return m;
}

void softmax_rows(Eigen::MatrixXd& logits) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double top = logits.row(i).maxCoeff();
        logits.row(i) = (logits.row(i).array() - top).exp();
        logits.row(i) /= logits.row(i).sum();
    }
}

Eigen::MatrixXd sample_masks(Rng& rng, Eigen::Index rows, Eigen::Index cols, double rate) {
    const double keep_scale = 1.0 / (1.0 - rate);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = uniform_unit(rng) < rate ? 0.0 : keep_scale;
    return m;
}

double mean_nll(const Eigen::MatrixXd& probs, std::span<const int> labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        total -= std::log(std::max(probs(static_cast<Eigen::Index>(i), labels[i]), 1e-300));
    return total / static_cast<double>(labels.size());
}

}  // namespace

Eigen::MatrixXd mlp_forward(const MlpParameters& params, const Eigen::MatrixXd& inputs, const DropoutMasks& masks) {
    Eigen::MatrixXd h = inputs;
    for (std::size_t l = 0; l < params.size(); ++l) {
        Eigen::MatrixXd z = h * params[l].weights.transpose();
        z.rowwise() += params[l].bias.transpose();
        if (l + 1 < params.size()) {
            h = z.cwiseMax(0.0);
            if (!masks.empty()) h = h.cwiseProduct(masks[l]);
        } else {
            h = std::move(z);
        }
    }
    softmax_rows(h);
    return h;
}

double mlp_loss(const MlpParameters& params, const Eigen::MatrixXd& inputs, std::span<const int> labels,
                const DropoutMasks& masks, double weight_decay, MlpParameters* gradient) {
    const std::size_t depth = params.size();
    const auto n = static_cast<double>(inputs.rows());

    // Keep post-activation inputs to each layer and the ReLU pre-activations.
    std::vector<Eigen::MatrixXd> layer_inputs(depth);
    std::vector<Eigen::MatrixXd> pre(depth);
    Eigen::MatrixXd h = inputs;
    for (std::size_t l = 0; l < depth; ++l) {
        layer_inputs[l] = h;
        Eigen::MatrixXd z = h * params[l].weights.transpose();
        z.rowwise() += params[l].bias.transpose();
        pre[l] = z;
        if (l + 1 < depth) {
            h = z.cwiseMax(0.0);
            if (!masks.empty()) h = h.cwiseProduct(masks[l]);
        } else {
            h = std::move(z);
        }
    }
    softmax_rows(h);

    double penalty = 0.0;
    for (const auto& layer : params) penalty += layer.weights.squaredNorm() + layer.bias.squaredNorm();
    const double loss = mean_nll(h, labels) + 0.5 * weight_decay * penalty;
    if (gradient == nullptr) return loss;

    gradient->resize(depth);
    Eigen::MatrixXd delta = h;  // d(mean NLL)/d(logits)
    for (std::size_t i = 0; i < labels.size(); ++i) delta(static_cast<Eigen::Index>(i), labels[i]) -= 1.0;
    delta /= n;
    for (std::size_t l = depth; l-- > 0;) {
        (*gradient)[l].weights = delta.transpose() * layer_inputs[l] + weight_decay * params[l].weights;
        (*gradient)[l].bias = delta.colwise().sum().transpose() + weight_decay * params[l].bias;
        if (l == 0) break;
        Eigen::MatrixXd back = delta * params[l].weights;
        if (!masks.empty()) back = back.cwiseProduct(masks[l - 1]);
        delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return loss;
}

DropoutMLP::DropoutMLP(MlpConfig config) : config_(std::move(config)) {
    if (config_.num_classes < 2) throw ValidationError("DropoutMLP: need at least 2 classes");
    if (!(config_.dropout >= 0.0 && config_.dropout < 1.0)) throw ValidationError("DropoutMLP: dropout must be in [0,1)");
    if (config_.num_samples == 0) throw ValidationError("DropoutMLP: need at least one sample");
    if (!(config_.val_fraction >= 0.0 && config_.val_fraction < 1.0))
        throw ValidationError("DropoutMLP: val_fraction must be in [0,1)");
    for (auto w : config_.hidden)
        if (w == 0) throw ValidationError("DropoutMLP: hidden widths must be positive");
}

MlpParameters DropoutMLP::initial_parameters(std::size_t input_dim) const {
    Rng rng = make_rng(config_.seed, {0x1417});
    std::normal_distribution<double> normal(0.0, 1.0);
    MlpParameters params;
    std::size_t fan_in = input_dim;
    auto widths = config_.hidden;
    widths.push_back(config_.num_classes);
    for (auto out : widths) {
        DenseLayer layer{Eigen::MatrixXd(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_in)),
                         Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
        const double scale = std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
        for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
            for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = scale * normal(rng);
        params.push_back(std::move(layer));
        fan_in = out;
    }
    return params;
}

void DropoutMLP::draw_inference_masks() {
    Rng rng = make_rng(config_.seed, {0x3a5c});
    inference_masks_.assign(config_.num_samples, {});
    for (auto& sample : inference_masks_)
        for (auto width : config_.hidden)
            sample.push_back(sample_masks(rng, 1, static_cast<Eigen::Index>(width), config_.dropout).row(0));
}

void DropoutMLP::fit(std::span<const LabelledExample> data) {
    validate_dataset(data, config_.num_classes);
    if (!data.empty()) input_dim_ = data.front().features.size();
    if (input_dim_ == 0) throw FitError("DropoutMLP: input dimension unknown before the first non-empty fit");
    params_ = initial_parameters(input_dim_);
    draw_inference_masks();
    steps_run_ = best_step_ = 0;
    if (data.empty()) return;

    Rng rng = make_rng(config_.seed, {0x7a17});
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t n_val = 0;
    if (data.size() >= 2 && config_.val_fraction > 0.0) {
        shuffle(order.begin(), order.end(), rng);
        n_val = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(config_.val_fraction * static_cast<double>(data.size()))));
    }
    const std::span<const std::size_t> val_rows(order.data(), n_val);
    const std::span<const std::size_t> train_rows(order.data() + n_val, order.size() - n_val);

    const Eigen::MatrixXd x_train = to_matrix(data, train_rows);
    std::vector<int> y_train;
    for (auto r : train_rows) y_train.push_back(data[r].label);
    Eigen::MatrixXd x_val;
    std::vector<int> y_val;
    if (n_val > 0) {
        x_val = to_matrix(data, val_rows);
        for (auto r : val_rows) y_val.push_back(data[r].label);
    }

    MlpParameters best = params_;
    double best_val = n_val > 0 ? mean_nll(mlp_forward(params_, x_val, {}), y_val)
                                : std::numeric_limits<double>::infinity();
    MlpParameters grad;
    for (std::size_t step = 1; step <= config_.max_steps; ++step) {
        DropoutMasks masks;
        if (config_.dropout > 0.0)
            for (auto width : config_.hidden)
                masks.push_back(sample_masks(rng, x_train.rows(), static_cast<Eigen::Index>(width), config_.dropout));
        const double loss = mlp_loss(params_, x_train, y_train, masks, config_.weight_decay, &grad);
        if (!std::isfinite(loss)) throw TrainingDivergedError("DropoutMLP: non-finite training loss at step " +
                                                              std::to_string(step));
        for (std::size_t l = 0; l < params_.size(); ++l) {
            params_[l].weights -= config_.learning_rate * grad[l].weights;
            params_[l].bias -= config_.learning_rate * grad[l].bias;
        }
        steps_run_ = step;
        if (n_val > 0) {
            const double val = mean_nll(mlp_forward(params_, x_val, {}), y_val);
            if (!std::isfinite(val)) throw TrainingDivergedError("DropoutMLP: non-finite validation loss");
            if (val < best_val) {
                best_val = val;
                best = params_;
                best_step_ = step;
            }
        }
    }
    if (n_val > 0) {
        params_ = std::move(best);
    } else {
        best_step_ = steps_run_;
    }
}

PredictiveEnsemble DropoutMLP::ensemble_predict(std::span<const double> x) const {
    const std::vector<Features> one{Features(x.begin(), x.end())};
    return predict_batch(one).at(0);
}

EnsembleBatch DropoutMLP::predict_batch(std::span<const Features> xs) const {
    if (params_.empty()) throw FitError("DropoutMLP: predict before fit");
    const auto n = static_cast<Eigen::Index>(xs.size());
    const auto c = static_cast<Eigen::Index>(config_.num_classes);
    Eigen::MatrixXd inputs(n, static_cast<Eigen::Index>(input_dim_));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (xs[static_cast<std::size_t>(i)].size() != input_dim_)
            throw ValidationError("DropoutMLP: wrong feature dimension");
        for (Eigen::Index d = 0; d < inputs.cols(); ++d)
            inputs(i, d) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
    }

    const auto k = static_cast<Eigen::Index>(config_.num_samples);
    EnsembleBatch batch;
    batch.num_classes = config_.num_classes;
    batch.weights = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    batch.conditionals.resize(k, n * c);
    for (Eigen::Index j = 0; j < k; ++j) {
        DropoutMasks masks;
        for (const auto& row : inference_masks_[static_cast<std::size_t>(j)]) masks.push_back(row.replicate(n, 1));
        const Eigen::MatrixXd probs = mlp_forward(params_, inputs, masks);
        for (Eigen::Index i = 0; i < n; ++i) batch.conditionals.block(j, i * c, 1, c) = probs.row(i);
    }
    return batch;
}

}  // namespace streamsift
