#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace sgais {

/// Well-known stream ids. Particle i uses kParticleBase + i.
namespace streams {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kResample = 2;
inline constexpr std::uint64_t kShuffle = 3;
inline constexpr std::uint64_t kTruth = 4;
inline constexpr std::uint64_t kNestedSampling = 5;
inline constexpr std::uint64_t kReservoir = 6;
inline constexpr std::uint64_t kParticleBase = std::uint64_t{1} << 32;
}  // namespace streams

/// Deterministic random stream keyed by (seed, stream id).
///
/// Two streams constructed from the same pair produce the same draws. Streams are
/// single-owner; parallel code pre-splits one stream per task.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Standard normal.
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);
  /// Exponential(1).
  double exponential();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace sgais
