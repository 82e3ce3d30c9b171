#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace heavytail {

/// Counter-based generator (Philox4x32-10).
///
/// Every output is a pure function of (seed, stream, position), so trial `i`
/// of an experiment can be reproduced without replaying trials 0..i-1 and
/// parallel execution order has no effect on the numbers drawn. Satisfies
/// UniformRandomBitGenerator, so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng() : CounterRng(0, 0) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform double on (0, 1], 53 bits of resolution.
  double uniform_open_closed() noexcept;

  /// Advances the block counter by `blocks` (each block yields two outputs).
  void discard_blocks(std::uint64_t blocks) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Raw Philox4x32-10 block function; exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter,
                                                   std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  unsigned next_ = 2;
};

/// Stream index reserved for hyperparameter tuning runs, disjoint from trial indices.
constexpr std::uint64_t tuning_stream(std::uint64_t k) noexcept {
  return (std::uint64_t{1} << 63) | k;
}

}  // namespace heavytail
