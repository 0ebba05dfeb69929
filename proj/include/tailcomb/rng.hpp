#pragma once

#include <array>
#include <cstdint>

namespace tailcomb {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3", SC'11). Pure function of (counter, key).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Counter-based random stream.
///
/// The key is the 64-bit master seed; the 128-bit counter is
/// (block index, stream id). The output sequence is therefore a pure function
/// of (master_seed, stream_id, counter), and the harness gives every
/// replicate its own stream_id so results do not depend on scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
            std::uint64_t counter = 0) noexcept;

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  // Number of Philox blocks consumed so far.
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  // Uniform on the open interval (0,1) with 53-bit resolution.
  double uniform() noexcept;
  // Standard normal via the Box-Muller transform (pairs are cached).
  double normal() noexcept;
  double exponential() noexcept;
  // Gamma(shape, scale 1). Marsaglia-Tsang for shape >= 1; shape < 1 uses
  // Gamma(shape + 1) * U^(1/shape).
  double gamma(double shape) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
  PhiloxCounter block_{};
  int available_ = 0;  // unread 64-bit words left in block_
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tailcomb
