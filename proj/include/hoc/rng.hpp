#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace hoc {

/// Philox4x32-10 counter-based generator.
///
/// A (key, stream) pair selects an independent substream; the counter walks
/// through it. Two generators with equal key and stream produce identical
/// sequences on every platform, which is what makes block-parallel sampling
/// reproducible independently of the worker count.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  Philox4x32(std::uint64_t key, std::uint64_t stream) noexcept;

  result_type operator()() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  /// Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

/// Random source with the handful of variates the toolkit needs.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) noexcept : engine_(seed, stream) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  double exponential() noexcept { return -std::log1p(-uniform()); }
  /// Standard Laplace (scale 1, variance 2).
  double laplace() noexcept;
  /// Student t with nu degrees of freedom (Bailey's polar method).
  double student_t(double nu) noexcept;

 private:
  Philox4x32 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Deterministically mixes a master seed with a purpose tag so that
/// independent stages of one experiment never share a substream.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) noexcept;

}  // namespace hoc
