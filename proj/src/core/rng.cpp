#include "core/rng.hpp"

#include <cmath>

namespace delaylab::rng {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Maps 64 random bits to a double strictly inside (0,1); never 0, so it is
// safe under log().
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
  return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(
    const std::array<std::uint32_t, 4>& counter, std::uint64_t key) {
  std::uint32_t c0 = counter[0], c1 = counter[1], c2 = counter[2],
                c3 = counter[3];
  std::uint32_t k0 = std::uint32_t(key), k1 = std::uint32_t(key >> 32);
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(kMul0) * c0;
    const std::uint64_t p1 = std::uint64_t(kMul1) * c2;
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32);
    const std::uint32_t lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32);
    const std::uint32_t lo1 = std::uint32_t(p1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    c0 = n0;
    c1 = lo1;
    c2 = n2;
    c3 = lo0;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return {c0, c1, c2, c3};
}

double standard_normal(std::uint64_t seed, std::uint64_t index) {
  // One Philox block yields a Box-Muller pair; even/odd indices pick the
  // cosine/sine branch so each index maps to exactly one draw.
  const std::uint64_t pair = index >> 1;
  const auto out = philox4x32(
      {std::uint32_t(pair), std::uint32_t(pair >> 32), 0x64656C61u,
       0x796C6162u},
      seed);
  const double u1 = to_unit(out[0], out[1]);
  const double u2 = to_unit(out[2], out[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 6.283185307179586 * u2;
  return (index & 1) ? radius * std::sin(angle) : radius * std::cos(angle);
}

double uniform01(std::uint64_t seed, std::uint64_t index) {
  const auto out = philox4x32(
      {std::uint32_t(index), std::uint32_t(index >> 32), 0x756E6966u,
       0x6F726D31u},
      seed);
  return to_unit(out[0], out[1]);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t master, std::uint64_t stream,
                        std::uint64_t index) {
  const std::uint64_t a =
      splitmix64(master ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
  return splitmix64(a ^ (0xD1B54A32D192ED03ull * (index + 1)));
}

}  // namespace delaylab::rng
