#include "nlirf/rng.hpp"

#include <cmath>
#include <numbers>

namespace nlirf {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Midpoint of a 2^-52 grid cell: never 0 or 1.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

__extension__ typedef unsigned __int128 uint128_t;

// Lane layout of counter word 3: [purpose:8][kind:2][lane:22].
constexpr std::uint32_t kKindUniform = 0;
constexpr std::uint32_t kKindNormal = 1;
constexpr std::uint32_t kKindInteger = 2;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t t, std::uint32_t lane,
                                               std::uint32_t kind) const noexcept {
  const std::uint32_t word3 = (static_cast<std::uint32_t>(purpose_) << 24) |
                              ((kind & 0x3u) << 22) | (lane & 0x3FFFFFu);
  return philox4x32({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32),
                     replicate_, word3},
                    {static_cast<std::uint32_t>(seed_),
                     static_cast<std::uint32_t>(seed_ >> 32)});
}

double CounterRng::uniform(std::uint64_t t, std::uint32_t lane) const noexcept {
  const auto b = block(t, lane, kKindUniform);
  return to_open_unit(b[0], b[1]);
}

double CounterRng::normal(std::uint64_t t, std::uint32_t lane) const noexcept {
  // Lanes 2k and 2k+1 share one Box-Muller pair.
  const auto b = block(t, lane >> 1, kKindNormal);
  const double u1 = to_open_unit(b[0], b[1]);
  const double u2 = to_open_unit(b[2], b[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (lane & 1u) ? r * std::sin(angle) : r * std::cos(angle);
}

std::uint64_t CounterRng::below(std::uint64_t bound, std::uint64_t t,
                                std::uint32_t lane) const noexcept {
  const auto b = block(t, lane, kKindInteger);
  const std::uint64_t bits = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  // Multiply-shift; bias is below 2^-64 * bound.
  return static_cast<std::uint64_t>((static_cast<uint128_t>(bits) * bound) >> 64);
}

}  // namespace nlirf
