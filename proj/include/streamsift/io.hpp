#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "streamsift/errors.hpp"
#include "streamsift/example.hpp"

namespace streamsift {

/// Malformed CSV input. Row and column are 1-based; 0 means "not applicable".
class CsvError : public Error {
public:
    CsvError(const std::string& message, std::size_t row, std::size_t column);
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

class IdxError : public Error {
public:
    enum class Kind { io, bad_magic, truncated, count_mismatch };
    IdxError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct CsvOptions {
    /// Zero-based index of the label column; negative counts from the end (-1 = last).
    int label_column = -1;
    bool header = false;
};

/// Comma-separated, unquoted numeric rows. Row order is preserved.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Feature-only rows (no label column), e.g. target inputs.
std::vector<Features> load_feature_csv(const std::filesystem::path& path, bool header = false);

/// Writes features followed by the label as the last column, with round-trip precision.
void write_csv(const std::filesystem::path& path, const Dataset& data);

void write_feature_csv(const std::filesystem::path& path, const std::vector<Features>& inputs);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// MNIST-style IDX pair: images (magic 0x00000803, big-endian count/rows/cols, u8 pixels)
/// and labels (magic 0x00000801, big-endian count, u8 labels). Pixels are scaled to [0, 1].
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Writes `data` as an IDX pair; features must be in [0, 1] and rows * cols long.
void write_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path, const Dataset& data,
               std::uint32_t rows, std::uint32_t cols);

}  // namespace streamsift
