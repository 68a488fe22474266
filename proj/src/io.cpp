#include "streamsift/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace streamsift {

CsvError::CsvError(const std::string& message, std::size_t row, std::size_t column)
    : Error("csv row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + message),
      row_(row),
      column_(column) {}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_field(std::string_view field, std::size_t row, std::size_t col) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        throw CsvError("cannot parse \"" + std::string(field) + "\" as a number", row, col);
    if (!std::isfinite(value)) throw CsvError("non-finite value", row, col);
    return value;
}

/// Calls `on_row(fields, row_number)` for every non-blank data line.
template <typename F>
void for_each_row(const std::filesystem::path& path, bool header, F&& on_row) {
    auto in = open_input(path);
    std::string line;
    std::size_t row = 0;
    std::size_t expected = 0;
    bool skipped_header = !header;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        std::vector<double> fields;
        std::string_view rest(line);
        std::size_t col = 0;
        while (true) {
            ++col;
            const auto comma = rest.find(',');
            fields.push_back(parse_field(rest.substr(0, comma), row, col));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (expected == 0) expected = fields.size();
        if (fields.size() != expected)
            throw CsvError("expected " + std::to_string(expected) + " columns, found " + std::to_string(fields.size()),
                           row, 0);
        on_row(fields, row);
    }
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) throw Error("format_double failed");
    return std::string(buf.data(), ptr);
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    Dataset out;
    for_each_row(path, options.header, [&](const std::vector<double>& fields, std::size_t row) {
        const auto width = static_cast<int>(fields.size());
        const int label_col = options.label_column < 0 ? width + options.label_column : options.label_column;
        if (label_col < 0 || label_col >= width)
            throw CsvError("label column " + std::to_string(options.label_column) + " out of range", row, 0);
        if (width < 2) throw CsvError("row has no feature columns", row, 0);
        const double raw = fields[static_cast<std::size_t>(label_col)];
        if (raw < 0 || raw != std::floor(raw) || raw > 1e9)
            throw CsvError("label must be a non-negative integer", row, static_cast<std::size_t>(label_col) + 1);
        LabelledExample e;
        e.label = static_cast<int>(raw);
        for (int c = 0; c < width; ++c)
            if (c != label_col) e.features.push_back(fields[static_cast<std::size_t>(c)]);
        out.push_back(std::move(e));
    });
    if (out.empty()) throw EmptyDatasetError("no data rows in " + path.string());
    return out;
}

std::vector<Features> load_feature_csv(const std::filesystem::path& path, bool header) {
    std::vector<Features> out;
    for_each_row(path, header, [&](const std::vector<double>& fields, std::size_t) { out.push_back(fields); });
    if (out.empty()) throw EmptyDatasetError("no data rows in " + path.string());
    return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
    auto out = open_output(path);
    for (const auto& e : data) {
        for (double v : e.features) out << format_double(v) << ',';
        out << e.label << '\n';
    }
}

void write_feature_csv(const std::filesystem::path& path, const std::vector<Features>& inputs) {
    auto out = open_output(path);
    for (const auto& x : inputs) {
        for (std::size_t i = 0; i < x.size(); ++i) out << (i ? "," : "") << format_double(x[i]);
        out << '\n';
    }
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& what) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4))
        throw IdxError(IdxError::Kind::truncated, what + ": header is truncated");
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                                static_cast<char>(v)};
    out.write(b.data(), 4);
}

std::vector<unsigned char> read_payload(std::istream& in, std::size_t size, const std::string& what) {
    std::vector<unsigned char> buf(size);
    if (size > 0 && !in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(size)))
        throw IdxError(IdxError::Kind::truncated, what + ": expected " + std::to_string(size) + " payload bytes");
    return buf;
}

std::ifstream open_idx(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IdxError(IdxError::Kind::io, "cannot open " + path.string());
    return in;
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    auto images = open_idx(images_path);
    const std::string iname = images_path.string();
    const auto imagic = read_be32(images, iname);
    if (imagic != 0x803) throw IdxError(IdxError::Kind::bad_magic, iname + ": bad magic " + std::to_string(imagic));
    const auto count = read_be32(images, iname);
    const auto rows = read_be32(images, iname);
    const auto cols = read_be32(images, iname);
    const std::size_t pixels = std::size_t{rows} * cols;
    const auto image_bytes = read_payload(images, pixels * count, iname);

    auto labels = open_idx(labels_path);
    const std::string lname = labels_path.string();
    const auto lmagic = read_be32(labels, lname);
    if (lmagic != 0x801) throw IdxError(IdxError::Kind::bad_magic, lname + ": bad magic " + std::to_string(lmagic));
    const auto lcount = read_be32(labels, lname);
    if (lcount != count)
        throw IdxError(IdxError::Kind::count_mismatch, std::to_string(count) + " images but " +
                                                           std::to_string(lcount) + " labels");
    const auto label_bytes = read_payload(labels, count, lname);

    Dataset out(count);
    for (std::size_t n = 0; n < count; ++n) {
        auto& x = out[n].features;
        x.resize(pixels);
        for (std::size_t p = 0; p < pixels; ++p) x[p] = image_bytes[n * pixels + p] / 255.0;
        out[n].label = label_bytes[n];
    }
    return out;
}

void write_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path, const Dataset& data,
               std::uint32_t rows, std::uint32_t cols) {
    const std::size_t pixels = std::size_t{rows} * cols;
    auto images = open_output(images_path);
    auto labels = open_output(labels_path);
    write_be32(images, 0x803);
    write_be32(images, static_cast<std::uint32_t>(data.size()));
    write_be32(images, rows);
    write_be32(images, cols);
    write_be32(labels, 0x801);
    write_be32(labels, static_cast<std::uint32_t>(data.size()));
    for (const auto& e : data) {
        if (e.features.size() != pixels) throw ValidationError("write_idx: feature length does not match rows * cols");
        if (e.label < 0 || e.label > 255) throw ValidationError("write_idx: label does not fit in a byte");
        for (double v : e.features) {
            if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("write_idx: pixel outside [0, 1]");
            images.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
        labels.put(static_cast<char>(static_cast<unsigned char>(e.label)));
    }
}

}  // namespace streamsift
