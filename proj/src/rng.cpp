#include "nibec/rng.hpp"

#include <cmath>

namespace nibec {

namespace {
constexpr std::uint64_t kParity = 0x1bd11bdaa9fc1a22ull;
constexpr int kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};

inline std::uint64_t rotl(std::uint64_t x, int r) {
  return (x << r) | (x >> (64 - r));
}
}  // namespace

ThreefryBlock threefry2x64(std::uint64_t k0, std::uint64_t k1,
                           std::uint64_t c0, std::uint64_t c1) {
  const std::uint64_t ks[3] = {k0, k1, kParity ^ k0 ^ k1};
  std::uint64_t x0 = c0 + ks[0];
  std::uint64_t x1 = c1 + ks[1];
  for (int r = 0; r < 20; ++r) {
    x0 += x1;
    x1 = rotl(x1, kRot[r % 8]);
    x1 ^= x0;
    if (r % 4 == 3) {
      const std::uint64_t j = static_cast<std::uint64_t>(r / 4 + 1);
      x0 += ks[j % 3];
      x1 += ks[(j + 1) % 3] + j;
    }
  }
  return {x0, x1};
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t RandomStream::next_u64() {
  if (pending_valid_) {
    pending_valid_ = false;
    return pending_;
  }
  const ThreefryBlock b = threefry2x64(k0_, k1_, ctr_++, 0);
  pending_ = b.x1;
  pending_valid_ = true;
  return b.x0;
}

double RandomStream::uniform() {
  // 53 significant bits, shifted into (0, 1].
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

std::pair<double, double> RandomStream::normal_pair() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * M_PI * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

double RandomStream::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  auto [z0, z1] = normal_pair();
  cached_ = z1;
  have_cached_ = true;
  return z0;
}

double RandomStream::uniform_in(double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
}

}  // namespace nibec
