#pragma once

#include <array>
#include <cstdint>

namespace gpsurv {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A 64-bit seed
/// forms the key; each block of four 32-bit outputs comes from encrypting an
/// incrementing 128-bit counter, so streams are reproducible across platforms.
class Philox4x32 {
 public:
  explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (pairs are cached).
  double normal();

  /// Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gpsurv
