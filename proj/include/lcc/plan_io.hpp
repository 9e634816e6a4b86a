#pragma once

// .lccp correction-plan file (little-endian):
//   magic "LCCP", version u32 = 1, N u64, d u64, then for every sample in
//   ascending order a flags byte (bit0 = CC, bit1 = correctible) followed,
//   for correctible samples only, by d f32 target coordinates.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lcc/correction.hpp"
#include "lcc/dataset.hpp"
#include "lcc/error.hpp"

namespace lcc {

namespace detail {
inline constexpr std::array<char, 4> kPlanMagic{'L', 'C', 'C', 'P'};
inline constexpr std::uint32_t kPlanVersion = 1;
inline constexpr std::uint8_t kFlagCc = 1;
inline constexpr std::uint8_t kFlagCorrectible = 2;
}  // namespace detail

inline void save_plan(const CorrectionPlan& plan, const std::filesystem::path& path) {
    auto out = detail::open_for_write(path);
    out.write(detail::kPlanMagic.data(), 4);
    detail::write_pod<std::uint32_t>(out, detail::kPlanVersion);
    detail::write_pod<std::uint64_t>(out, plan.size());
    detail::write_pod<std::uint64_t>(out, plan.dim());
    std::vector<float> row(plan.dim());
    for (std::size_t i = 0; i < plan.size(); ++i) {
        std::uint8_t flags = 0;
        if (plan.is_cc[i]) flags |= detail::kFlagCc;
        if (plan.is_correctible[i]) flags |= detail::kFlagCorrectible;
        detail::write_pod(out, flags);
        if (!plan.is_correctible[i]) continue;
        auto src = plan.target.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = static_cast<float>(src[j]);
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Loads a plan. Mode and k are not stored; the result reports exact mode
/// and k = 0.
inline CorrectionPlan load_plan(const std::filesystem::path& path) {
    auto in = detail::open_for_read(path);
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || magic != detail::kPlanMagic) throw FormatError("bad magic: expected \"LCCP\"");
    std::uint32_t version = 0;
    if (!detail::read_pod(in, version)) throw FormatError("truncated header: version");
    if (version != detail::kPlanVersion) throw FormatError("unsupported version " + std::to_string(version));
    std::uint64_t n = 0, d = 0;
    if (!detail::read_pod(in, n)) throw FormatError("truncated header: N");
    if (!detail::read_pod(in, d)) throw FormatError("truncated header: d");
    if (n == 0 || d == 0) throw FormatError("plan shape must be positive (N=" + std::to_string(n) + ", d=" + std::to_string(d) + ")");
    const auto file_size = std::filesystem::file_size(path);
    if (n > file_size || d > file_size) throw FormatError("plan shape exceeds file size");

    CorrectionPlan plan;
    plan.is_cc.assign(n, false);
    plan.is_correctible.assign(n, false);
    plan.target = Matrix(n, d);
    std::vector<float> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t flags = 0;
        if (!detail::read_pod(in, flags)) throw FormatError("truncated payload at sample " + std::to_string(i));
        if (flags & ~(detail::kFlagCc | detail::kFlagCorrectible)) {
            throw FormatError("unknown flag bits at sample " + std::to_string(i));
        }
        plan.is_cc[i] = flags & detail::kFlagCc;
        plan.is_correctible[i] = flags & detail::kFlagCorrectible;
        if (plan.is_cc[i] && plan.is_correctible[i]) {
            throw ValidationError("sample " + std::to_string(i) + " is flagged both CC and correctible");
        }
        if (!plan.is_correctible[i]) continue;
        ++plan.n_corr;
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(d * sizeof(float)));
        if (!in) throw FormatError("truncated target at sample " + std::to_string(i));
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(row[j])) throw ValidationError("non-finite target at sample " + std::to_string(i));
            plan.target(i, j) = row[j];
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after plan payload");
    return plan;
}

}  // namespace lcc
