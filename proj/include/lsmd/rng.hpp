#pragma once

#include <array>
#include <cstdint>

namespace lsmd::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32-10 block function (counter-based, Random123 constants).
Block philox4x32(Block counter, Key key);

// Stream identifiers occupy the first counter word, so draws for different
// model components never share a counter.
enum class Stream : std::uint32_t {
  epsilon = 1,
  eta = 2,
  loading = 3,
  factor = 4,
  inner_start = 5,
  covariate = 6,
  test = 99,
};

/// Stateless keyed generator. A draw is addressed by (seed, stream, unit,
/// period, slot); the 64-bit seed is the Philox key and the counter is
/// (stream, unit, period, slot). Draws are reproducible in any order and on
/// any thread.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream) noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint32_t unit, std::uint32_t period, std::uint32_t slot = 0) const noexcept;

  /// Standard normal via Box-Muller on one Philox block.
  double normal(std::uint32_t unit, std::uint32_t period, std::uint32_t slot = 0) const noexcept;

 private:
  Key key_;
  std::uint32_t stream_;
};

/// Sequential view over a CounterRng for code that just wants "the next"
/// draw (e.g. random starting values). Deterministic given (seed, stream).
class SequentialRng {
 public:
  SequentialRng(std::uint64_t seed, Stream stream) noexcept : rng_(seed, stream) {}
  double normal() noexcept { return rng_.normal(0, 0, next_++); }
  double uniform() noexcept { return rng_.uniform(0, 0, next_++); }

 private:
  CounterRng rng_;
  std::uint32_t next_ = 0;
};

}  // namespace lsmd::rng
