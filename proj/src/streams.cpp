#include "streamsift/streams.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "streamsift/errors.hpp"
#include "streamsift/random.hpp"

namespace streamsift {

namespace {

void check_steps(std::size_t num_steps) {
    if (num_steps == 0) throw ConfigError("need at least one step", "stream.steps");
}

/// Seeded sample of `count` indices from `pool`, returned in ascending order.
std::vector<std::size_t> sample_sorted(std::vector<std::size_t> pool, std::size_t count, Rng& rng) {
    if (count > pool.size())
        throw ConfigError("per-step count " + std::to_string(count) + " exceeds the " + std::to_string(pool.size()) +
                              " examples available",
                          "stream.per_step");
    shuffle(pool.begin(), pool.end(), rng);
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<int> labels_in(const Dataset& data) {
    std::set<int> labels;
    for (const auto& e : data) labels.insert(e.label);
    return {labels.begin(), labels.end()};
}

}  // namespace

Nonstationarity parse_nonstationarity(std::string_view name) {
    if (name == "split") return Nonstationarity::split;
    if (name == "permuted") return Nonstationarity::permuted;
    if (name == "stationary") return Nonstationarity::stationary;
    throw ConfigError("unknown stream kind \"" + std::string(name) + "\"", "stream.kind");
}

std::string_view nonstationarity_name(Nonstationarity kind) {
    switch (kind) {
        case Nonstationarity::split: return "split";
        case Nonstationarity::permuted: return "permuted";
        case Nonstationarity::stationary: return "stationary";
    }
    return "unknown";
}

Features apply_permutation(const Features& features, const std::vector<std::size_t>& permutation) {
    if (permutation.size() != features.size()) throw ValidationError("permutation length does not match features");
    Features out(features.size());
    for (std::size_t i = 0; i < permutation.size(); ++i) out[i] = features[permutation[i]];
    return out;
}

StreamSchedule split_stream(const Dataset& dataset, std::size_t num_steps, std::uint64_t seed,
                            const StreamOptions& options) {
    check_steps(num_steps);
    validate_dataset(dataset);
    std::vector<int> classes = labels_in(dataset);
    if (classes.size() != 2 * num_steps)
        throw ConfigError("split stream needs exactly " + std::to_string(2 * num_steps) + " classes, dataset has " +
                              std::to_string(classes.size()),
                          "stream.steps");
    Rng rng = make_rng(seed, {0x5b1175});
    if (options.shuffle_classes) shuffle(classes.begin(), classes.end(), rng);

    StreamSchedule schedule;
    schedule.kind = Nonstationarity::split;
    schedule.seed = seed;
    for (std::size_t t = 0; t < num_steps; ++t) {
        const std::vector<int> pair{classes[2 * t], classes[2 * t + 1]};
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < dataset.size(); ++i)
            if (dataset[i].label == pair[0] || dataset[i].label == pair[1]) rows.push_back(i);
        if (options.per_step) rows = sample_sorted(std::move(rows), *options.per_step, rng);

        Dataset batch;
        for (auto r : rows) batch.push_back(dataset[r]);
        schedule.steps.push_back(std::move(batch));
        schedule.source_indices.push_back(std::move(rows));
        schedule.classes_per_step.push_back(pair);
    }
    return schedule;
}

StreamSchedule permuted_stream(const Dataset& dataset, std::size_t num_steps, std::uint64_t seed,
                               const StreamOptions& options) {
    check_steps(num_steps);
    validate_dataset(dataset);
    if (dataset.empty()) throw ConfigError("empty dataset", "stream.dataset");
    const std::size_t dim = dataset.front().features.size();
    const std::vector<int> classes = labels_in(dataset);
    Rng rng = make_rng(seed, {0x9e2a});

    StreamSchedule schedule;
    schedule.kind = Nonstationarity::permuted;
    schedule.seed = seed;
    for (std::size_t t = 0; t < num_steps; ++t) {
        std::vector<std::size_t> perm(dim);
        std::iota(perm.begin(), perm.end(), 0);
        if (t > 0) shuffle(perm.begin(), perm.end(), rng);

        std::vector<std::size_t> rows(dataset.size());
        std::iota(rows.begin(), rows.end(), 0);
        if (options.per_step) rows = sample_sorted(std::move(rows), *options.per_step, rng);

        Dataset batch;
        for (auto r : rows) batch.push_back({apply_permutation(dataset[r].features, perm), dataset[r].label});
        schedule.steps.push_back(std::move(batch));
        schedule.source_indices.push_back(std::move(rows));
        schedule.permutations.push_back(std::move(perm));
        schedule.classes_per_step.push_back(classes);
    }
    return schedule;
}

StreamSchedule stationary_stream(const Dataset& dataset, std::size_t num_steps, std::uint64_t seed,
                                 const StreamOptions& options) {
    check_steps(num_steps);
    validate_dataset(dataset);
    const std::size_t need = options.per_step ? *options.per_step * num_steps : num_steps;
    if (dataset.size() < need || (options.per_step && *options.per_step == 0))
        throw ConfigError("not enough examples for " + std::to_string(num_steps) + " non-empty steps", "stream.steps");

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, {0x57a7});
    shuffle(order.begin(), order.end(), rng);

    StreamSchedule schedule;
    schedule.kind = Nonstationarity::stationary;
    schedule.seed = seed;
    std::size_t cursor = 0;
    for (std::size_t t = 0; t < num_steps; ++t) {
        std::size_t size = 0;
        if (options.per_step) {
            size = *options.per_step;
        } else {
            size = dataset.size() / num_steps + (t < dataset.size() % num_steps ? 1 : 0);
        }
        std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                                      order.begin() + static_cast<std::ptrdiff_t>(cursor + size));
        cursor += size;
        Dataset batch;
        for (auto r : rows) batch.push_back(dataset[r]);
        schedule.classes_per_step.push_back(labels_in(batch));
        schedule.steps.push_back(std::move(batch));
        schedule.source_indices.push_back(std::move(rows));
    }
    return schedule;
}

Dataset inject_label_noise(const Dataset& dataset, double rate, std::size_t num_classes, std::uint64_t seed) {
    if (num_classes < 2) throw ValidationError("inject_label_noise: need at least 2 classes");
    Rng rng = make_rng(seed, {0x4015e});
    Dataset out = dataset;
    for (auto& e : out) {
        if (uniform_unit(rng) >= rate) continue;
        const auto shift = 1 + uniform_index(rng, num_classes - 1);
        e.label = static_cast<int>((static_cast<std::size_t>(e.label) + shift) % num_classes);
    }
    return out;
}

Dataset synth_blobs(std::size_t num_classes, std::size_t per_class, std::size_t dim, double spread, std::uint64_t seed) {
    if (num_classes < 2) throw ValidationError("synth_blobs: need at least 2 classes");
    if (dim == 0) throw ValidationError("synth_blobs: dimension must be positive");
    if (!(spread >= 0.0)) throw ValidationError("synth_blobs: spread must be non-negative");
    Rng rng = make_rng(seed, {0xb10b5});
    std::vector<Features> means(num_classes, Features(dim));
    for (auto& m : means)
        for (auto& v : m) v = 2.0 * uniform_unit(rng) - 1.0;

    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset out;
    out.reserve(num_classes * per_class);
    for (std::size_t c = 0; c < num_classes; ++c)
        for (std::size_t i = 0; i < per_class; ++i) {
            Features x = means[c];
            for (auto& v : x) v += spread * normal(rng);
            out.push_back({std::move(x), static_cast<int>(c)});
        }
    return out;
}

}  // namespace streamsift
