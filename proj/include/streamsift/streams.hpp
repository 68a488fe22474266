#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "streamsift/example.hpp"

namespace streamsift {

enum class Nonstationarity { split, permuted, stationary };

Nonstationarity parse_nonstationarity(std::string_view name);
std::string_view nonstationarity_name(Nonstationarity kind);

/// A fully materialized stream: batch t holds the examples arriving at step t.
struct StreamSchedule {
    std::vector<Dataset> steps;
    Nonstationarity kind = Nonstationarity::stationary;
    std::vector<std::vector<int>> classes_per_step;
    /// Feature permutation applied at each step (permuted streams only).
    std::vector<std::vector<std::size_t>> permutations;
    /// Index into the source dataset of every example, parallel to `steps`.
    std::vector<std::vector<std::size_t>> source_indices;
    std::uint64_t seed = 0;

    std::size_t num_steps() const noexcept { return steps.size(); }
};

struct StreamOptions {
    /// Sample this many examples per step (without replacement); all when unset.
    std::optional<std::size_t> per_step;
    /// Split streams: seeded class-pair order when true, identity pairing {0,1},{2,3},... when false.
    bool shuffle_classes = true;
};

/// Marginal label shift: step t holds two classes not seen before.
/// Throws ConfigError unless the dataset has exactly 2T distinct labels.
StreamSchedule split_stream(const Dataset& dataset, std::size_t num_steps, std::uint64_t seed,
                            const StreamOptions& options = {});

/// Conditional input shift: step t applies a seeded feature permutation to the whole dataset;
/// step 0 uses the identity.
StreamSchedule permuted_stream(const Dataset& dataset, std::size_t num_steps, std::uint64_t seed,
                               const StreamOptions& options = {});

/// Seeded uniform partition into T non-empty batches.
StreamSchedule stationary_stream(const Dataset& dataset, std::size_t num_steps, std::uint64_t seed,
                                 const StreamOptions& options = {});

/// new[i] = old[permutation[i]].
Features apply_permutation(const Features& features, const std::vector<std::size_t>& permutation);

/// Replaces each label, with probability `rate`, by a different class drawn uniformly.
Dataset inject_label_noise(const Dataset& dataset, double rate, std::size_t num_classes, std::uint64_t seed);

/// Class c is an isotropic Gaussian with standard deviation `spread` around a seeded mean
/// drawn uniformly from [-1, 1]^dim. Examples are ordered class by class.
Dataset synth_blobs(std::size_t num_classes, std::size_t per_class, std::size_t dim, double spread, std::uint64_t seed);

}  // namespace streamsift
