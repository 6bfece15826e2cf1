#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace conforma {

// Counter-based pseudorandom numbers (Philox4x32-10, Salmon et al. 2011).
// Every draw is a pure function of (key, counter), so parallel sampling with
// per-path streams reproduces serial results bit for bit.

namespace philox {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kBump0 = 0x9E3779B9u;
constexpr std::uint32_t kBump1 = 0xBB67AE85u;

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Block round_once(Block ctr, Key key) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
  return Block{static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
}

inline Block generate(Key key, Block ctr) {
  for (int round = 0; round < 10; ++round) {
    ctr = round_once(ctr, key);
    key[0] += kBump0;
    key[1] += kBump1;
  }
  return ctr;
}

inline Block block(std::uint64_t key, std::uint64_t hi, std::uint64_t lo) {
  const Key k{static_cast<std::uint32_t>(key),
              static_cast<std::uint32_t>(key >> 32)};
  const Block c{static_cast<std::uint32_t>(lo),
                static_cast<std::uint32_t>(lo >> 32),
                static_cast<std::uint32_t>(hi),
                static_cast<std::uint32_t>(hi >> 32)};
  return generate(k, c);
}

}  // namespace philox

/// Derives an independent 64-bit seed for path `index` of source `source`
/// from the master seed. Used to key one stream per sampled path.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t source,
                                 std::uint64_t index) {
  const auto b = philox::block(master, source, index);
  return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
}

/// One logical random stream identified by (seed, stream). Draws are counted,
/// and each counter value maps to one 128-bit Philox block.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return to_unit(next_block(), 0); }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Standard normal via Box-Muller; consumes one block (two uniforms).
  double next_normal() {
    const auto b = next_block();
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(word64(b, 0) >> 11) + 1.0) *
                      0x1.0p-53;
    const double u2 = to_unit(b, 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next_u64() { return word64(next_block(), 0); }

 private:
  philox::Block next_block() {
    return philox::block(seed_, stream_, counter_++);
  }

  static std::uint64_t word64(const philox::Block& b, int half) {
    return (static_cast<std::uint64_t>(b[2 * half]) << 32) | b[2 * half + 1];
  }

  static double to_unit(const philox::Block& b, int half) {
    return static_cast<double>(word64(b, half) >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace conforma
