#pragma once
// Counter-based random streams (Threefry2x64, 20 rounds).  Draw n is a pure
// function of (seed, stream, n), so ensembles are reproducible bit-for-bit
// regardless of how work is scheduled across threads.

#include <cstdint>
#include <utility>

namespace nibec {

struct ThreefryBlock {
  std::uint64_t x0, x1;
};

ThreefryBlock threefry2x64(std::uint64_t k0, std::uint64_t k1,
                           std::uint64_t c0, std::uint64_t c1);

// 64-bit finalizer used to whiten stream/domain tags before keying.
std::uint64_t mix64(std::uint64_t z);

class RandomStream {
 public:
  // `domain` separates independent uses (path increments, initial draws,
  // property-test draws) under the same user-facing seed.
  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain = 0)
      : k0_(seed), k1_(mix64(stream ^ mix64(domain ^ 0x9e3779b97f4a7c15ull))) {}

  // Uniform on (0, 1] (never returns 0, safe under log).
  double uniform();
  // Standard normal via Box-Muller; draws are cached pairwise.
  double normal();
  std::pair<double, double> normal_pair();
  // Uniform on [lo, hi).
  double uniform_in(double lo, double hi);

  void skip_to(std::uint64_t counter) {
    ctr_ = counter;
    have_cached_ = false;
    pending_valid_ = false;
  }

 private:
  std::uint64_t next_u64();
  std::uint64_t k0_, k1_;
  std::uint64_t ctr_ = 0;
  bool pending_valid_ = false;
  std::uint64_t pending_ = 0;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace nibec
