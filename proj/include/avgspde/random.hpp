#pragma once

// Counter-based random streams. Every draw is a pure function of
// (base_seed, role, replica, counter), so replicas can be generated in any
// order or on any worker and still reproduce bit for bit.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace avgspde {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

enum class StreamRole : std::uint32_t {
  SlowNoise = 1,
  FastNoise = 2,
  DeviationNoise = 3,
  EstimatorNoise = 4,
};

std::string_view role_name(StreamRole role);

class NoiseStream {
 public:
  NoiseStream(std::uint64_t base_seed, StreamRole role, std::uint64_t replica);

  std::uint64_t base_seed() const noexcept { return seed_; }
  StreamRole role() const noexcept { return role_; }
  std::uint64_t replica() const noexcept { return replica_; }

  /// Number of Philox blocks consumed so far.
  std::uint64_t counter() const noexcept { return counter_; }
  void set_counter(std::uint64_t c) noexcept { counter_ = c; }

  /// Fills `out` with independent N(0,1) draws. Each call starts on a fresh
  /// block and consumes ceil(n/2) blocks (two Box-Muller normals per block).
  void fill_normals(std::span<double> out);

  /// One uniform in (0, 1); consumes one block.
  double uniform();

 private:
  std::array<std::uint32_t, 4> next_block();

  std::uint64_t seed_;
  StreamRole role_;
  std::uint64_t replica_;
  std::array<std::uint32_t, 2> key_;
  std::uint64_t tag_;
  std::uint64_t counter_ = 0;
};

NoiseStream derive_stream(std::uint64_t base_seed, StreamRole role, std::uint64_t replica);

/// SplitMix64 finalizer, used for stream identities and config hashing.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace avgspde
