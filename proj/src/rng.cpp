#include "csmix/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csmix {

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
  // Expand the seed through splitmix64 as recommended for xoshiro seeding.
  std::uint64_t s = seed;
  for (auto& w : s_) {
    s += 0x9e3779b97f4a7c15ULL;
    w = hash64(s);
  }
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = hash64(seed);
  for (std::uint64_t p : path) s = hash64(s ^ hash64(p));
  return Rng(s);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection.
  std::uint64_t t = (-n) % n;
  for (;;) {
    std::uint64_t r = next();
    __uint128_t m = static_cast<__uint128_t>(r) * n;
    if (static_cast<std::uint64_t>(m) >= t) return static_cast<std::uint64_t>(m >> 64);
  }
}

double Rng::uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

double Rng::uniform_oc() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma: shape and rate must be positive");
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::log_gamma_draw(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("log_gamma_draw: shape must be positive");
  if (shape >= 1.0) return std::log(gamma(shape));
  // log(G(a)) = log(G(a+1)) + log(U)/a keeps tiny shapes finite.
  return std::log(gamma(shape + 1.0)) + std::log(uniform()) / shape;
}

double Rng::beta(double a, double b) {
  const double lx = log_gamma_draw(a);
  const double ly = log_gamma_draw(b);
  const double d = ly - lx;
  double r;
  if (d > 0) {
    const double e = std::exp(-d);
    r = e / (1.0 + e);
  } else {
    r = 1.0 / (1.0 + std::exp(d));
  }
  constexpr double lo = 1e-300;
  constexpr double hi = 1.0 - 1e-16;
  return std::clamp(r, lo, hi);
}

std::size_t Rng::categorical_logw(std::span<const double> logw) {
  if (logw.empty()) throw std::invalid_argument("categorical_logw: empty weights");
  double m = logw[0];
  for (double w : logw) m = std::max(m, w);
  if (!std::isfinite(m)) throw std::invalid_argument("categorical_logw: all weights are -inf");
  double total = 0.0;
  for (double w : logw) total += std::exp(w - m);
  const double target = uniform() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    acc += std::exp(logw[k] - m);
    if (target <= acc) return k;
  }
  return logw.size() - 1;
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
    std::swap(p[i], p[j]);
  }
  return p;
}

}  // namespace csmix
