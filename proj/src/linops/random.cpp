#include "stochograd/random.hpp"

namespace stochograd {

namespace {

constexpr uint128 make_u128(std::uint64_t hi, std::uint64_t lo) {
  return (static_cast<uint128>(hi) << 64) | lo;
}

constexpr uint128 kMultiplier = make_u128(0x2360ED051FC65DA4ULL, 0x4385DF649FCCF645ULL);
constexpr uint128 kDefaultIncrement = make_u128(0x5851F42D4C957F2DULL, 0x14057B7EF767814FULL);

}  // namespace

Pcg64::Pcg64(std::uint64_t seed, std::uint64_t stream) {
  inc_ = stream == 0 ? kDefaultIncrement : ((kDefaultIncrement + (static_cast<uint128>(stream) << 1)) | 1U);
  state_ = 0;
  step();
  state_ += seed;
  step();
}

Pcg64 Pcg64::from_state(uint128 initstate, uint128 initseq) {
  Pcg64 g;
  g.inc_ = (initseq << 1) | 1U;
  g.state_ = 0;
  g.step();
  g.state_ += initstate;
  g.step();
  return g;
}

void Pcg64::step() { state_ = state_ * kMultiplier + inc_; }

Pcg64::result_type Pcg64::operator()() {
  step();
  const auto hi = static_cast<std::uint64_t>(state_ >> 64);
  const auto lo = static_cast<std::uint64_t>(state_);
  const unsigned rot = static_cast<unsigned>(state_ >> 122);
  const std::uint64_t x = hi ^ lo;
  return (x >> rot) | (x << ((64U - rot) & 63U));
}

std::uint64_t Pcg64::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  uint128 m = static_cast<uint128>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<uint128>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Pcg64::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

}  // namespace stochograd
