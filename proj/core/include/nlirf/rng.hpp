#pragma once

#include <array>
#include <cstdint>

namespace nlirf {

/// Philox4x32-10 counter-based bijection (Salmon et al., SC'11).
/// Stateless: output is a pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Independent uses of one seed draw from disjoint counter spaces.
enum class StreamPurpose : std::uint32_t {
  kInnovation = 0,
  kIrfReplicate = 1,
  kPirfReplicate = 2,
  kFactorReplicate = 3,
  kLyapunov = 4,
  kBootstrap = 5,
  kPermutation = 6,
  kGeneric = 7,
  kSampling = 8,
};

/// Reproducible random stream keyed by (seed, replicate, purpose).
///
/// Every draw is addressed by a time index t and a lane i, so the value of
/// draw (t, i) never depends on how many other draws were taken or on which
/// thread took them.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint32_t replicate = 0,
                      StreamPurpose purpose = StreamPurpose::kInnovation) noexcept
      : seed_(seed), replicate_(replicate), purpose_(purpose) {}

  /// Uniform on the open interval (0, 1), 52-bit resolution.
  double uniform(std::uint64_t t, std::uint32_t lane = 0) const noexcept;

  /// Standard normal via Box-Muller on a dedicated block.
  double normal(std::uint64_t t, std::uint32_t lane = 0) const noexcept;

  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound, std::uint64_t t,
                      std::uint32_t lane = 0) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t replicate() const noexcept { return replicate_; }

  CounterRng with_replicate(std::uint32_t r) const noexcept {
    return CounterRng(seed_, r, purpose_);
  }

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t t, std::uint32_t lane,
                                     std::uint32_t kind) const noexcept;

  std::uint64_t seed_;
  std::uint32_t replicate_;
  StreamPurpose purpose_;
};

}  // namespace nlirf
