#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace streamsift {

using Features = std::vector<double>;

struct LabelledExample {
    Features features;
    int label = 0;

    bool operator==(const LabelledExample&) const = default;
};

using Dataset = std::vector<LabelledExample>;

/// Throws ValidationError unless all examples share one feature dimension and
/// (when num_classes > 0) every label lies in [0, num_classes).
void validate_dataset(std::span<const LabelledExample> data, std::size_t num_classes = 0);

/// Largest label + 1, or 0 for an empty dataset.
std::size_t infer_num_classes(std::span<const LabelledExample> data);

std::vector<Features> features_of(std::span<const LabelledExample> data);

}  // namespace streamsift
