#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace csmix {

// splitmix64 finalizer; used to whiten seeds and hash stream addresses.
inline std::uint64_t hash64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with hand-rolled distributions. Everything downstream of a
// run seed is produced here, so draws do not depend on the standard
// library's distribution implementations.
//
// Streams are addressed by (seed, path...): the same address always yields
// the same stream, which is what makes per-subject parallel updates and
// checkpoint resume reproduce the sequential chain bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream for (seed, path). Order of path elements matters.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next();
  // Unbiased integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n);

  double uniform();     // (0,1)
  double uniform_oc();  // (0,1]
  double normal();      // standard normal
  bool bernoulli(double p) { return uniform() < p; }

  // Gamma(shape, rate), Marsaglia-Tsang with the shape<1 boost.
  double gamma(double shape, double rate = 1.0);
  // log of a Gamma(shape,1) draw; stays finite for tiny shapes where the
  // plain draw would underflow to 0.
  double log_gamma_draw(double shape);
  // Beta(a,b) via two log-space gamma draws; never returns exactly 0 or 1.
  double beta(double a, double b);
  double chisq(double df) { return gamma(0.5 * df, 0.5); }

  // Index draw from unnormalized log-weights (log-sum-exp normalized).
  std::size_t categorical_logw(std::span<const double> logw);

  // Uniform random permutation of {0,...,n-1}.
  std::vector<int> permutation(int n);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream addresses used by the sampler; a block id plus iteration (and
// subject, for per-subject blocks) fully names a stream.
namespace stream {
inline constexpr std::uint64_t kBeta = 1;
inline constexpr std::uint64_t kRandomEffects = 2;
inline constexpr std::uint64_t kCovariance = 3;
inline constexpr std::uint64_t kDelta = 4;
inline constexpr std::uint64_t kConsideration = 5;
inline constexpr std::uint64_t kSticks = 6;
inline constexpr std::uint64_t kAttention = 7;
inline constexpr std::uint64_t kSlices = 8;
inline constexpr std::uint64_t kExtend = 9;
inline constexpr std::uint64_t kAssign = 10;
inline constexpr std::uint64_t kAlpha = 11;
}  // namespace stream

}  // namespace csmix
