#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace mrw::core {

/// One Monte Carlo replication stream.  Identical (master_seed, stream_index)
/// pairs give bit-identical sample sequences regardless of which worker runs them.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  SeedSpec with_stream(std::uint64_t idx) const { return {master_seed, idx}; }
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Independent random domains derived from one SeedSpec.  Each consumer of
/// randomness owns a tag so adding draws in one place never shifts another.
enum class Domain : std::uint32_t {
  generic = 0,
  stationary = 1,
  fbm = 2,
  field = 3,
  strip_topup = 4,
  bootstrap = 5,
  spectral_field = 6,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based stream key: the 64-bit Philox key comes from (master_seed, domain),
/// the stream index occupies the upper half of the counter.
class StreamKey {
 public:
  StreamKey(const SeedSpec& seed, Domain domain) noexcept;

  /// Raw 128-bit block at a counter position.
  std::array<std::uint32_t, 4> block(std::uint64_t position) const noexcept;

  /// Two independent standard normals from the block at `position`.
  std::pair<double, double> normal_pair(std::uint64_t position) const noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
};

inline double u64_to_open01(std::uint64_t x) noexcept {
  // 53 random bits mapped to the open interval (0, 1).
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

inline std::pair<double, double> box_muller(double u1, double u2) noexcept {
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

/// Sequential generator over a StreamKey.
class Rng {
 public:
  Rng(const SeedSpec& seed, Domain domain) noexcept : key_(seed, domain) {}

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept { return u64_to_open01(next_u64()); }
  double normal() noexcept;
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() noexcept { return next_u64(); }

 private:
  StreamKey key_;
  std::uint64_t position_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int buf_used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mrw::core
