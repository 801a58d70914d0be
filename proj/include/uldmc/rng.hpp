#pragma once

#include <Eigen/Core>
#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <random>

namespace uldmc {

/// Every chain, replica and probe set owns one of these.
using Rng = std::mt19937_64;

/// Ziggurat sampler; several times faster than std::normal_distribution.
using NormalDist = boost::random::normal_distribution<double>;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of chain `chain` inside experiment cell `cell`.
constexpr std::uint64_t chain_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t chain) noexcept {
    return base ^ splitmix64(cell * 65536ULL + chain);
}

inline Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
    NormalDist normal;
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    return z;
}

template <typename Derived>
void fill_standard_normal(Eigen::DenseBase<Derived>& out, Rng& rng) {
    NormalDist normal;
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = normal(rng);
}

} // namespace uldmc
