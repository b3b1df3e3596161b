#include "avgspde/random.hpp"

#include <cmath>
#include <numbers>

namespace avgspde {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform strictly inside (0, 1).
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::string_view role_name(StreamRole role) {
  switch (role) {
    case StreamRole::SlowNoise: return "slow-noise";
    case StreamRole::FastNoise: return "fast-noise";
    case StreamRole::DeviationNoise: return "deviation-noise";
    case StreamRole::EstimatorNoise: return "estimator-noise";
  }
  return "unknown";
}

NoiseStream::NoiseStream(std::uint64_t base_seed, StreamRole role, std::uint64_t replica)
    : seed_(base_seed), role_(role), replica_(replica) {
  // Role and replica enter both the key and the upper counter words.
  const std::uint64_t id = mix64(mix64(base_seed) ^ mix64((static_cast<std::uint64_t>(role) << 56) ^ replica));
  key_ = {static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  tag_ = mix64(id ^ 0x5851F42D4C957F2Dull);
}

std::array<std::uint32_t, 4> NoiseStream::next_block() {
  const std::uint64_t c = counter_++;
  return philox4x32({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                     static_cast<std::uint32_t>(tag_), static_cast<std::uint32_t>(tag_ >> 32)},
                    key_);
}

void NoiseStream::fill_normals(std::span<double> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    const auto b = next_block();
    const double u1 = to_unit(b[0], b[1]);
    const double u2 = to_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out[i++] = r * std::cos(theta);
    if (i < out.size()) out[i++] = r * std::sin(theta);
  }
}

double NoiseStream::uniform() {
  const auto b = next_block();
  return to_unit(b[0], b[1]);
}

NoiseStream derive_stream(std::uint64_t base_seed, StreamRole role, std::uint64_t replica) {
  return NoiseStream(base_seed, role, replica);
}

}  // namespace avgspde
