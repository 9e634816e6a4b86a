#pragma once

// Latent datasets: an N x d matrix of latent representations plus N true
// labels, with the .lccd binary layout and a CSV layout.
//
// .lccd (all little-endian):
//   bytes 0-3    magic "LCCD"
//   bytes 4-7    version u32 = 1
//   bytes 8-15   N u64
//   bytes 16-23  d u64
//   N*d f32      Z, row-major
//   N u32        labels

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lcc/error.hpp"
#include "lcc/matrix.hpp"
#include "lcc/random.hpp"

namespace lcc {

using LabelId = std::uint32_t;

static_assert(std::endian::native == std::endian::little, "on-disk formats assume a little-endian host");

struct LatentDataset {
    Matrix z;
    std::vector<LabelId> y;
    std::optional<std::vector<std::uint32_t>> ground_truth_clusters;

    std::size_t size() const noexcept { return z.rows(); }
    std::size_t dim() const noexcept { return z.cols(); }
};

/// Throws ValidationError if the dataset breaks an invariant.
inline void validate(const LatentDataset& ds) {
    if (ds.z.rows() == 0) throw ValidationError("dataset must contain at least one sample (N >= 1)");
    if (ds.z.cols() == 0) throw ValidationError("latent dimension must be positive (d >= 1)");
    if (ds.y.size() != ds.z.rows()) {
        throw ValidationError("label count " + std::to_string(ds.y.size()) + " does not match N = " +
                              std::to_string(ds.z.rows()));
    }
    if (ds.ground_truth_clusters && ds.ground_truth_clusters->size() != ds.z.rows()) {
        throw ValidationError("ground_truth_clusters length does not match N");
    }
    for (std::size_t i = 0; i < ds.z.rows(); ++i) {
        for (double v : ds.z.row(i)) {
            if (!std::isfinite(v)) throw ValidationError("non-finite value in row " + std::to_string(i));
        }
    }
}

/// Distinct label ids in ascending order.
inline std::vector<LabelId> distinct_labels(std::span<const LabelId> y) {
    std::vector<LabelId> ids(y.begin(), y.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

enum class FileFormat { binary, csv };

namespace detail {

inline constexpr std::array<char, 4> kDatasetMagic{'L', 'C', 'C', 'D'};
inline constexpr std::uint32_t kDatasetVersion = 1;

template <class T>
void write_pod(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
bool read_pod(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return static_cast<bool>(in);
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view s, std::size_t line_no) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(s) + "'");
    }
    return v;
}

inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline void save_binary(const LatentDataset& ds, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out.write(kDatasetMagic.data(), 4);
    write_pod<std::uint32_t>(out, kDatasetVersion);
    write_pod<std::uint64_t>(out, ds.size());
    write_pod<std::uint64_t>(out, ds.dim());
    std::vector<float> row(ds.dim());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto src = ds.z.row(i);
        std::transform(src.begin(), src.end(), row.begin(), [](double v) { return static_cast<float>(v); });
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    out.write(reinterpret_cast<const char*>(ds.y.data()), static_cast<std::streamsize>(ds.y.size() * sizeof(LabelId)));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline LatentDataset load_binary(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || magic != kDatasetMagic) throw FormatError("bad magic: expected \"LCCD\"");
    std::uint32_t version = 0;
    if (!read_pod(in, version)) throw FormatError("truncated header: version");
    if (version != kDatasetVersion) throw FormatError("unsupported version " + std::to_string(version));
    std::uint64_t n = 0, d = 0;
    if (!read_pod(in, n)) throw FormatError("truncated header: N");
    if (!read_pod(in, d)) throw FormatError("truncated header: d");
    if (n == 0) throw ValidationError("dataset must contain at least one sample (N >= 1)");
    if (d == 0) throw ValidationError("latent dimension must be positive (d >= 1)");

    const auto file_size = std::filesystem::file_size(path);
    const std::uint64_t max_elems = std::numeric_limits<std::uint64_t>::max() / 8;
    if (n > max_elems / d || 24 + n * d * 4 + n * 4 != file_size) {
        throw FormatError("shape N=" + std::to_string(n) + ", d=" + std::to_string(d) +
                          " does not match file size " + std::to_string(file_size));
    }

    LatentDataset ds;
    std::vector<float> raw(n * d);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(float)));
    ds.y.resize(n);
    in.read(reinterpret_cast<char*>(ds.y.data()), static_cast<std::streamsize>(n * sizeof(LabelId)));
    if (!in) throw FormatError("truncated payload");
    ds.z = Matrix(n, d, std::vector<double>(raw.begin(), raw.end()));
    validate(ds);
    return ds;
}

inline void save_csv(const LatentDataset& ds, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "y";
    for (std::size_t j = 0; j < ds.dim(); ++j) out << ",z" << j;
    out << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << ds.y[i];
        for (double v : ds.z.row(i)) out << ',' << format_double(v);
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline LatentDataset load_csv(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("missing header line");
    const auto header = split(trim(line), ',');
    if (header.empty() || trim(header[0]) != "y") throw FormatError("header: first column must be 'y'");
    const std::size_t d = header.size() - 1;
    if (d == 0) throw ValidationError("latent dimension must be positive (d >= 1)");
    for (std::size_t j = 0; j < d; ++j) {
        if (trim(header[j + 1]) != "z" + std::to_string(j)) {
            throw FormatError("header: column " + std::to_string(j + 1) + " must be 'z" + std::to_string(j) + "'");
        }
    }

    std::vector<double> values;
    std::vector<LabelId> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != d + 1) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(d + 1) +
                              " columns, got " + std::to_string(cells.size()));
        }
        const auto label_text = trim(cells[0]);
        std::uint64_t label = 0;
        auto [ptr, ec] = std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
        if (ec != std::errc() || ptr != label_text.data() + label_text.size() ||
            label > std::numeric_limits<LabelId>::max()) {
            throw FormatError("line " + std::to_string(line_no) + ": label must be an integer in [0, 2^32)");
        }
        labels.push_back(static_cast<LabelId>(label));
        for (std::size_t j = 0; j < d; ++j) values.push_back(parse_double(cells[j + 1], line_no));
    }
    LatentDataset ds;
    ds.z = Matrix(labels.size(), d, std::move(values));
    ds.y = std::move(labels);
    validate(ds);
    return ds;
}

}  // namespace detail

inline void save_dataset(const LatentDataset& ds, const std::filesystem::path& path,
                         FileFormat format = FileFormat::binary) {
    validate(ds);
    if (format == FileFormat::binary) {
        detail::save_binary(ds, path);
    } else {
        detail::save_csv(ds, path);
    }
}

inline LatentDataset load_dataset(const std::filesystem::path& path, FileFormat format = FileFormat::binary) {
    return format == FileFormat::binary ? detail::load_binary(path) : detail::load_csv(path);
}

/// Parameters of the Gaussian-blob generator. Cluster c carries label
/// c / clusters_per_label.
struct BlobSpec {
    std::size_t n_labels = 2;
    std::size_t clusters_per_label = 1;
    std::size_t samples_per_cluster = 10;
    std::size_t dim = 2;
    double center_box_half_width = 10.0;
    double cluster_sigma = 0.1;
    double mislabel_fraction = 0.0;
    std::uint64_t seed = 0;
    /// Centers closer than this are redrawn. 0 disables rejection.
    double min_center_distance = 0.0;

    std::size_t n_clusters() const { return n_labels * clusters_per_label; }
    std::size_t n_samples() const { return n_clusters() * samples_per_cluster; }
};

inline void validate(const BlobSpec& spec) {
    if (spec.n_labels == 0) throw ParameterError("n_labels must be positive");
    if (spec.clusters_per_label == 0) throw ParameterError("clusters_per_label must be positive");
    if (spec.samples_per_cluster == 0) throw ParameterError("samples_per_cluster must be positive");
    if (spec.dim == 0) throw ParameterError("dim must be positive");
    if (!(spec.center_box_half_width > 0.0) || !std::isfinite(spec.center_box_half_width)) {
        throw ParameterError("center_box_half_width must be positive");
    }
    if (!(spec.cluster_sigma >= 0.0) || !std::isfinite(spec.cluster_sigma)) {
        throw ParameterError("cluster_sigma must be nonnegative");
    }
    if (!(spec.mislabel_fraction >= 0.0 && spec.mislabel_fraction <= 1.0)) {
        throw ParameterError("mislabel_fraction must lie in [0, 1]");
    }
    if (spec.mislabel_fraction > 0.0 && spec.n_labels < 2) {
        throw ParameterError("mislabel_fraction > 0 needs at least two labels");
    }
    if (!(spec.min_center_distance >= 0.0)) throw ParameterError("min_center_distance must be nonnegative");
}

/// Draws a labeled blob dataset. Coordinates are rounded to single precision
/// so the result survives a .lccd round trip unchanged.
inline LatentDataset generate_blobs(const BlobSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);
    std::uniform_real_distribution<double> box(-spec.center_box_half_width, spec.center_box_half_width);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto as_f32 = [](double v) { return static_cast<double>(static_cast<float>(v)); };

    const std::size_t n_clusters = spec.n_clusters();
    const std::size_t d = spec.dim;
    Matrix centers(n_clusters, d);
    const double min_d2 = spec.min_center_distance * spec.min_center_distance;
    constexpr int kMaxAttempts = 100000;
    for (std::size_t c = 0; c < n_clusters; ++c) {
        int attempts = 0;
        while (true) {
            for (auto& v : centers.row(c)) v = as_f32(box(rng));
            bool ok = true;
            for (std::size_t prev = 0; prev < c && ok; ++prev) {
                ok = squared_distance(centers.row(c), centers.row(prev)) >= min_d2;
            }
            if (ok) break;
            if (++attempts == kMaxAttempts) {
                throw ParameterError("cannot place " + std::to_string(n_clusters) +
                                     " centers at the requested minimum distance");
            }
        }
    }

    const std::size_t n = spec.n_samples();
    LatentDataset ds;
    ds.z = Matrix(n, d);
    ds.y.resize(n);
    std::vector<std::uint32_t> truth(n);
    std::size_t i = 0;
    for (std::size_t c = 0; c < n_clusters; ++c) {
        for (std::size_t s = 0; s < spec.samples_per_cluster; ++s, ++i) {
            auto row = ds.z.row(i);
            auto center = centers.row(c);
            for (std::size_t j = 0; j < d; ++j) row[j] = as_f32(center[j] + spec.cluster_sigma * gauss(rng));
            ds.y[i] = static_cast<LabelId>(c / spec.clusters_per_label);
            truth[i] = static_cast<std::uint32_t>(c);
        }
    }

    const auto n_mislabel = static_cast<std::size_t>(std::floor(spec.mislabel_fraction * static_cast<double>(n)));
    if (n_mislabel > 0) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        // partial Fisher-Yates: the first n_mislabel slots are a uniform sample
        for (std::size_t a = 0; a < n_mislabel; ++a) {
            std::uniform_int_distribution<std::size_t> pick(a, n - 1);
            std::swap(order[a], order[pick(rng)]);
        }
        std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_mislabel));
        std::uniform_int_distribution<LabelId> other(0, static_cast<LabelId>(spec.n_labels - 2));
        for (std::size_t a = 0; a < n_mislabel; ++a) {
            const std::size_t idx = order[a];
            LabelId l = other(rng);
            if (l >= ds.y[idx]) ++l;
            ds.y[idx] = l;
        }
    }
    ds.ground_truth_clusters = std::move(truth);
    return ds;
}

}  // namespace lcc
