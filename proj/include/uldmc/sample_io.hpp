#pragma once

// Sample files. CSV: header `step,x0,..,x{d-1},v0,..,v{d-1}` then one row per
// retained state. Binary: 16-byte header (magic "ULDS", u32 version = 1,
// u32 d, u32 count, little endian) followed by `count` records of 1 + 2d
// little-endian float64 values: step, x, v.

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace uldmc {

enum class SampleFormat { Csv, Binary };

struct SampleSet {
    Eigen::Index dim = 0;
    std::vector<std::uint64_t> steps;
    Eigen::MatrixXd states;  // count x 2d, x then v

    Eigen::Index count() const noexcept { return states.rows(); }
    Eigen::MatrixXd positions() const { return states.leftCols(dim); }
};

inline constexpr std::uint32_t kSampleFormatVersion = 1;

void write_samples(const std::string& path, const SampleSet& samples, SampleFormat format);

/// Format detected from the first four bytes.
SampleSet read_samples(const std::string& path);

} // namespace uldmc
