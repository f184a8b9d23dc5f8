#pragma once

#include <cstdint>
#include <limits>

namespace stochograd {

__extension__ typedef unsigned __int128 uint128;

/// PCG64 (XSL-RR 128/64). Models UniformRandomBitGenerator so it can drive
/// the std distributions.
class Pcg64 {
 public:
  using result_type = std::uint64_t;

  explicit Pcg64(std::uint64_t seed = 0, std::uint64_t stream = 0);
  /// Reference seeding of pcg64: increment = (initseq << 1) | 1.
  static Pcg64 from_state(uint128 initstate, uint128 initseq);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform integer in [0, bound) (Lemire's nearly-divisionless method).
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  uint128 state_ = 0;
  uint128 inc_ = 0;
  void step();
};

/// Fixed stream offsets so components seeded from one user seed never share a stream.
namespace streams {
inline constexpr std::uint64_t sampler = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t phantom = 3;
inline constexpr std::uint64_t power_method = 4;
inline constexpr std::uint64_t loopless = 5;
inline constexpr std::uint64_t test = 99;
}  // namespace streams

}  // namespace stochograd
