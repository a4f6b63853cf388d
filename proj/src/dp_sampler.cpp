#include "csmix/dp_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csmix {

namespace {
constexpr double kQClamp = 1e-12;
inline double clamp_q(double q) { return std::clamp(q, kQClamp, 1.0 - kQClamp); }
}  // namespace

ClusterStats ClusterStats::compute(const ConsiderationState& C, const std::vector<int>& S, int kstar, int J) {
  ClusterStats st;
  st.n_h.assign(kstar, 0);
  st.incl.assign(kstar, std::vector<int>(J, 0));
  for (std::size_t i = 0; i < S.size(); ++i) {
    const int h = S[i];
    if (h < 0 || h >= kstar) throw std::out_of_range("ClusterStats: assignment outside 1..K*");
    ++st.n_h[h];
    const CsRow& row = C.rows[i];
    for (int j = 0; j < J; ++j) st.incl[h][j] += row[j];
  }
  return st;
}

std::pair<double, double> q_posterior_params(const ClusterStats& stats, const Hyperparams& hyper, int h, int j) {
  const int in = stats.incl[h][j];
  const int out = stats.n_h[h] - in;
  return {hyper.a_q[j] + in, hyper.b_q[j] + out};
}

void sample_q(MixtureState& mix, const ClusterStats& stats, const Hyperparams& hyper, Rng& rng) {
  const int J = static_cast<int>(hyper.a_q.size());
  mix.Q.resize(mix.kstar);
  for (int h = 0; h < mix.kstar; ++h) {
    mix.Q[h].resize(J);
    for (int j = 0; j < J; ++j) {
      const auto [a, b] = q_posterior_params(stats, hyper, h, j);
      if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("sample_q: non-positive Beta parameters");
      mix.Q[h][j] = rng.beta(a, b);
    }
  }
}

void sample_sticks(MixtureState& mix, const ClusterStats& stats, Rng& rng) {
  // tail counts sum_{l>h} n_l
  std::vector<long> tail(mix.kstar + 1, 0);
  for (int h = mix.kstar - 1; h >= 0; --h) tail[h] = tail[h + 1] + stats.n_h[h];
  mix.V.resize(mix.kstar);
  for (int h = 0; h < mix.kstar; ++h) {
    mix.V[h] = rng.beta(1.0 + stats.n_h[h], mix.alpha + static_cast<double>(tail[h + 1]));
  }
  mix.recompute_weights();
}

void sample_slices(MixtureState& mix, Rng& rng) {
  for (std::size_t i = 0; i < mix.S.size(); ++i) {
    mix.u[i] = mix.omega[mix.S[i]] * rng.uniform_oc();
  }
}

void extend_sticks(MixtureState& mix, const Hyperparams& hyper, Rng& rng) {
  const int J = static_cast<int>(hyper.a_q.size());
  double u_star = 1.0;
  for (double ui : mix.u) u_star = std::min(u_star, ui);

  // leftover after h sticks is prod_{l<=h} (1-V_l); K* is the first h with
  // leftover < u*
  double leftover = 1.0;
  int k = 0;
  for (;;) {
    if (k == static_cast<int>(mix.V.size())) {
      mix.V.push_back(rng.beta(1.0, mix.alpha));
      mix.Q.emplace_back(J);
      for (int j = 0; j < J; ++j) mix.Q.back()[j] = rng.beta(hyper.a_q[j], hyper.b_q[j]);
    }
    leftover *= (1.0 - mix.V[k]);
    ++k;
    if (leftover < u_star) break;
  }
  mix.kstar = k;
  mix.V.resize(k);
  mix.Q.resize(k);
  mix.recompute_weights();
}

void sample_assignments(MixtureState& mix, const ConsiderationState& C, Rng& rng) {
  const int n = C.n();
  const int J = static_cast<int>(mix.Q.empty() ? 0 : mix.Q[0].size());

  // log Bernoulli-product weights per component, with q clamped before logs
  std::vector<std::vector<double>> logq(mix.kstar, std::vector<double>(J));
  std::vector<std::vector<double>> log1mq(mix.kstar, std::vector<double>(J));
  for (int h = 0; h < mix.kstar; ++h) {
    for (int j = 0; j < J; ++j) {
      const double q = clamp_q(mix.Q[h][j]);
      logq[h][j] = std::log(q);
      log1mq[h][j] = std::log1p(-q);
    }
  }

  std::vector<double> logw;
  std::vector<int> admissible;
  for (int i = 0; i < n; ++i) {
    logw.clear();
    admissible.clear();
    for (int h = 0; h < mix.kstar; ++h) {
      if (mix.omega[h] < mix.u[i]) continue;
      double lw = 0.0;
      const CsRow& row = C.rows[i];
      for (int j = 0; j < J; ++j) lw += row[j] ? logq[h][j] : log1mq[h][j];
      logw.push_back(lw);
      admissible.push_back(h);
    }
    if (admissible.empty())
      throw std::runtime_error("sample_assignments: no admissible component (slice invariant breached)");
    mix.S[i] = admissible[rng.categorical_logw(logw)];
  }
}

int count_occupied(const std::vector<int>& S, int kstar) {
  std::vector<char> seen(kstar, 0);
  int g = 0;
  for (int s : S) {
    if (!seen[s]) {
      seen[s] = 1;
      ++g;
    }
  }
  return g;
}

double sample_alpha(int G, int n, double alpha_current, const Hyperparams& hyper, Rng& rng) {
  if (G < 1 || n < 1) throw std::invalid_argument("sample_alpha: need G >= 1 and n >= 1");
  const double eta = rng.beta(alpha_current + 1.0, static_cast<double>(n));
  const double rate = hyper.b_alpha - std::log(eta);
  const double a1 = hyper.a_alpha + G;
  // weight on Gamma(a_alpha + G, rate) vs Gamma(a_alpha + G - 1, rate)
  const double w1 = (a1 - 1.0) / (a1 - 1.0 + n * rate);
  if (rng.uniform() < w1) return rng.gamma(a1, rate);
  return rng.gamma(a1 - 1.0, rate);
}

}  // namespace csmix
