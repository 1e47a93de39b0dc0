// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace splitlearn {

/// Reproducible random stream.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Floating-point draws are converted here rather than through
/// <random> distributions, which are implementation-defined, so a seed
/// yields the same numbers on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Independent stream for (seed, stream index), e.g. one per layer.
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace splitlearn
