#include "streamsift/bootstrap_forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "streamsift/errors.hpp"
#include "streamsift/random.hpp"

namespace streamsift {

namespace {

double gini(const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (double c : counts) sum_sq += c * c;
    return 1.0 - sum_sq / (total * total);
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child impurity
};

}  // namespace

BootstrapForest::BootstrapForest(ForestConfig config) : config_(config) {
    if (config_.num_classes < 2) throw ValidationError("BootstrapForest: need at least 2 classes");
    if (config_.num_trees == 0) throw ValidationError("BootstrapForest: need at least one tree");
    if (config_.min_leaf == 0) throw ValidationError("BootstrapForest: min_leaf must be positive");
    if (!(config_.smoothing > 0.0)) throw ValidationError("BootstrapForest: smoothing must be positive");
}

void BootstrapForest::fit(std::span<const LabelledExample> data) {
    if (data.empty()) throw FitError("BootstrapForest: empty training set");
    validate_dataset(data, config_.num_classes);
    dim_ = data.front().features.size();

    trees_.clear();
    trees_.reserve(config_.num_trees);
    for (std::size_t t = 0; t < config_.num_trees; ++t) {
        Rng rng = make_rng(config_.seed, {0xb00757, t});
        std::vector<std::size_t> rows(data.size());
        if (config_.bootstrap) {
            for (auto& r : rows) r = uniform_index(rng, data.size());
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        trees_.push_back(grow_tree(data, std::move(rows), rng()));
    }
}

BootstrapForest::Tree BootstrapForest::grow_tree(std::span<const LabelledExample> data, std::vector<std::size_t> rows,
                                                 std::uint64_t tree_seed) const {
    Rng rng(tree_seed);
    const std::size_t c = config_.num_classes;
    const std::size_t mtry =
        config_.features_per_split == 0
            ? std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim_)))))
            : std::min(config_.features_per_split, dim_);

    Tree tree;
    struct Pending {
        std::size_t node;
        std::vector<std::size_t> rows;
        std::size_t depth;
    };
    std::vector<Pending> stack;
    tree.emplace_back();
    stack.push_back({0, std::move(rows), 0});

    std::vector<std::size_t> features(dim_);
    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();

        std::vector<double> counts(c, 0.0);
        for (auto r : job.rows) counts[static_cast<std::size_t>(data[r].label)] += 1.0;
        const auto n = static_cast<double>(job.rows.size());
        const bool pure = std::count_if(counts.begin(), counts.end(), [](double v) { return v > 0.0; }) <= 1;

        Split best;
        if (!pure && job.depth < config_.max_depth && job.rows.size() >= 2 * config_.min_leaf) {
            std::iota(features.begin(), features.end(), 0);
            shuffle(features.begin(), features.end(), rng);
            best.impurity = std::numeric_limits<double>::infinity();

            std::vector<std::pair<double, int>> column(job.rows.size());
            // Keep drawing features past mtry until some valid split exists.
            for (std::size_t f = 0; f < dim_; ++f) {
                if (f >= mtry && best.feature >= 0) break;
                const std::size_t feat = features[f];
                for (std::size_t i = 0; i < job.rows.size(); ++i)
                    column[i] = {data[job.rows[i]].features[feat], data[job.rows[i]].label};
                std::sort(column.begin(), column.end());

                std::vector<double> left(c, 0.0);
                std::vector<double> right = counts;
                for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                    left[static_cast<std::size_t>(column[i].second)] += 1.0;
                    right[static_cast<std::size_t>(column[i].second)] -= 1.0;
                    const std::size_t n_left = i + 1;
                    if (column[i].first == column[i + 1].first) continue;
                    if (n_left < config_.min_leaf || column.size() - n_left < config_.min_leaf) continue;
                    const auto nl = static_cast<double>(n_left);
                    const double impurity = nl * gini(left, nl) + (n - nl) * gini(right, n - nl);
                    if (impurity < best.impurity) {
                        best.impurity = impurity;
                        best.feature = static_cast<int>(feat);
                        best.threshold = 0.5 * (column[i].first + column[i + 1].first);
                    }
                }
            }
        }

        if (best.feature < 0) {
            auto& leaf = tree[job.node];
            leaf.probs.resize(c);
            const double denom = n + config_.smoothing * static_cast<double>(c);
            for (std::size_t y = 0; y < c; ++y) leaf.probs[y] = (counts[y] + config_.smoothing) / denom;
            continue;
        }

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        for (auto r : job.rows)
            (data[r].features[static_cast<std::size_t>(best.feature)] <= best.threshold ? left_rows : right_rows)
                .push_back(r);

        const std::size_t left_id = tree.size();
        tree.emplace_back();
        tree.emplace_back();
        tree[job.node].feature = best.feature;
        tree[job.node].threshold = best.threshold;
        tree[job.node].left = left_id;
        tree[job.node].right = left_id + 1;
        stack.push_back({left_id + 1, std::move(right_rows), job.depth + 1});
        stack.push_back({left_id, std::move(left_rows), job.depth + 1});
    }
    return tree;
}

const BootstrapForest::Node& BootstrapForest::leaf_for(const Tree& tree, std::span<const double> x) const {
    std::size_t id = 0;
    while (tree[id].feature >= 0)
        id = x[static_cast<std::size_t>(tree[id].feature)] <= tree[id].threshold ? tree[id].left : tree[id].right;
    return tree[id];
}

PredictiveEnsemble BootstrapForest::ensemble_predict(std::span<const double> x) const {
    if (trees_.empty()) throw FitError("BootstrapForest: predict before fit");
    if (x.size() != dim_) throw ValidationError("BootstrapForest: wrong feature dimension");
    const auto k = static_cast<Eigen::Index>(trees_.size());
    PredictiveEnsemble out{Eigen::MatrixXd(k, static_cast<Eigen::Index>(config_.num_classes)),
                           Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k))};
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto& probs = leaf_for(trees_[static_cast<std::size_t>(j)], x).probs;
        for (std::size_t y = 0; y < probs.size(); ++y) out.conditionals(j, static_cast<Eigen::Index>(y)) = probs[y];
    }
    return out;
}

EnsembleBatch BootstrapForest::predict_batch(std::span<const Features> xs) const {
    if (trees_.empty()) throw FitError("BootstrapForest: predict before fit");
    const auto k = static_cast<Eigen::Index>(trees_.size());
    const auto c = static_cast<Eigen::Index>(config_.num_classes);
    EnsembleBatch batch;
    batch.num_classes = config_.num_classes;
    batch.weights = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    batch.conditionals.resize(k, c * static_cast<Eigen::Index>(xs.size()));
    for (std::size_t n = 0; n < xs.size(); ++n) {
        if (xs[n].size() != dim_) throw ValidationError("BootstrapForest: wrong feature dimension");
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto& probs = leaf_for(trees_[static_cast<std::size_t>(j)], xs[n]).probs;
            for (Eigen::Index y = 0; y < c; ++y)
                batch.conditionals(j, static_cast<Eigen::Index>(n) * c + y) = probs[static_cast<std::size_t>(y)];
        }
    }
    return batch;
}

}  // namespace streamsift
