#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gsanss {

/// Deterministic seed for a named sub-stream of a master seed, so that data
/// generation, hyperplanes and GLH draws can vary independently.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

using Rng = std::mt19937_64;

/// Standard normal draw via Box-Muller on the raw engine output. Used instead
/// of std::normal_distribution so sample streams do not depend on the
/// standard library implementation.
class NormalSampler {
 public:
  double operator()(Rng& rng);

 private:
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace gsanss
