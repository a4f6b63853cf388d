#include "csmix/oracle.hpp"

#include "csmix/cs_sampler.hpp"
#include "csmix/dp_sampler.hpp"
#include "csmix/logit.hpp"
#include "csmix/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace csmix {

namespace {
void check_guard(int J, const char* who) {
  if (J > kEnumGuardJ) throw std::invalid_argument(std::string(who) + ": J exceeds enumeration guard (20)");
  if (J < 1) throw std::invalid_argument(std::string(who) + ": J must be positive");
}
}  // namespace

std::vector<double> mixture_subset_masses(std::span<const double> w,
                                          const std::vector<std::vector<double>>& Q) {
  const int K = static_cast<int>(w.size());
  if (K == 0 || Q.size() != w.size()) throw std::invalid_argument("mixture_subset_masses: shape mismatch");
  const int J = static_cast<int>(Q[0].size());
  check_guard(J, "mixture_subset_masses");
  const std::size_t total = std::size_t{1} << J;
  std::vector<double> p(total, 0.0);
  std::vector<double> comp(total);
  for (int h = 0; h < K; ++h) {
    // build the product measure of component h by peeling one bit at a time
    comp[0] = 1.0;
    std::size_t filled = 1;
    for (int j = 0; j < J; ++j) {
      const double q = Q[h][j];
      for (std::size_t m = 0; m < filled; ++m) {
        comp[m | (std::size_t{1} << j)] = comp[m] * q;
        comp[m] *= (1.0 - q);
      }
      filled <<= 1;
    }
    for (std::size_t m = 0; m < total; ++m) p[m] += w[h] * comp[m];
  }
  return p;
}

MixturePmf mixture_cs_pmf(std::span<const double> omega, const std::vector<std::vector<double>>& Q) {
  double s = 0.0;
  for (double w : omega) s += w;
  if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("mixture_cs_pmf: weights do not sum to 1");
  MixturePmf out;
  out.p = mixture_subset_masses(omega, Q);
  out.empty_mass = out.p[0];
  return out;
}

std::vector<double> enumerate_cs_posterior(int i, const ResponseParams& params,
                                           const std::vector<double>& q_row, const PanelDataset& data,
                                           const CsRow& forced_i) {
  check_guard(data.J, "enumerate_cs_posterior");
  const std::size_t total = std::size_t{1} << data.J;
  const std::uint32_t forced_bits = cs_mask(forced_i);
  std::vector<double> logp(total, kNegInf);
  double m = kNegInf;
  for (std::size_t mask = 1; mask < total; ++mask) {
    if ((mask & forced_bits) != forced_bits) continue;  // structural zero
    const CsRow row = cs_from_mask(static_cast<std::uint32_t>(mask), data.J);
    logp[mask] = conditional_cs_logpmf(i, row, params, q_row, data, forced_i);
    m = std::max(m, logp[mask]);
  }
  std::vector<double> p(total, 0.0);
  if (m == kNegInf) return p;  // no admissible subset (cannot happen with T_i >= 1)
  double z = 0.0;
  for (std::size_t mask = 1; mask < total; ++mask)
    if (logp[mask] != kNegInf) z += std::exp(logp[mask] - m);
  for (std::size_t mask = 1; mask < total; ++mask)
    if (logp[mask] != kNegInf) p[mask] = std::exp(logp[mask] - m) / z;
  return p;
}

double marginal_response_prob(int j, const ResponseParams& params, const PanelDataset& data, int i,
                              int t, std::span<const double> cs_pmf) {
  check_guard(data.J, "marginal_response_prob");
  if (cs_pmf.size() != (std::size_t{1} << data.J))
    throw std::invalid_argument("marginal_response_prob: pmf size is not 2^J");
  const double nonempty = 1.0 - cs_pmf[0];
  if (!(nonempty > 0.0)) throw std::invalid_argument("marginal_response_prob: no mass on nonempty sets");
  const VectorXd V = utilities(params, data, i, t);
  double prob = 0.0;
  for (std::size_t mask = 1; mask < cs_pmf.size(); ++mask) {
    if (cs_pmf[mask] == 0.0) continue;
    if (!(mask & (std::size_t{1} << j))) continue;  // Pr(Y=j | c) = 0 when j not in c
    const CsRow row = cs_from_mask(static_cast<std::uint32_t>(mask), data.J);
    prob += (cs_pmf[mask] / nonempty) * choice_prob(j, row, V);
  }
  return prob;
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("tv_distance: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return 0.5 * s;
}

namespace {

// J=3 single-subject fixture with two identical responses: the admissible
// sets are the four supersets of {1}.
struct CsFixture {
  PanelDataset data;
  ResponseParams params;
  std::vector<double> q_row;
  CsRow forced;
};

CsFixture make_cs_fixture(std::uint64_t seed) {
  CsFixture fx;
  auto& data = fx.data;
  data.n = 1;
  data.J = 3;
  data.d_x = 1;
  data.d_z = 1;
  data.subjects.resize(1);
  auto& sub = data.subjects[0];
  sub.y = {0, 0};
  Rng rng = Rng::derive(seed, {0x0f1u});
  sub.x.resize(2 * 3);
  for (auto& v : sub.x) v = rng.normal();
  sub.z = sub.x;

  fx.params = ResponseParams::zeros(1, 3, 1, 1);
  fx.params.beta[0] = 1.0;
  fx.params.delta << 0.3, -0.2, 0.0;
  fx.q_row = {0.6, 0.45, 0.3};
  fx.forced = forced_mask(data)[0];
  return fx;
}

}  // namespace

std::vector<OracleCheckReport> run_oracle_checks(std::uint64_t seed, long cs_sweeps, long assign_draws) {
  std::vector<OracleCheckReport> out;

  {
    // (a) long-run law of the consideration-set M-H vs exact enumeration
    CsFixture fx = make_cs_fixture(seed);
    const std::vector<double> exact =
        enumerate_cs_posterior(0, fx.params, fx.q_row, fx.data, fx.forced);
    std::vector<double> counts(exact.size(), 0.0);
    CsRow C(3, 1);
    Rng rng = Rng::derive(seed, {0x0f2u});
    for (long s = 0; s < cs_sweeps; ++s) {
      mh_update_cs(0, C, fx.params, fx.q_row, fx.data, fx.forced, rng);
      counts[cs_mask(C)] += 1.0;
    }
    for (auto& c : counts) c /= static_cast<double>(cs_sweeps);
    const double tv = tv_distance(counts, exact);
    out.push_back({"cs_sampler_stationary", tv, 0.01, tv < 0.01});
  }

  {
    // (b) slice-sampled assignment law vs the direct categorical ~ omega_h f_h
    const int J = 3;
    MixtureState mix;
    mix.kstar = 2;
    mix.omega = {0.7, 0.3};
    mix.V = {0.7, 1.0};  // frozen weights; V unused below
    mix.Q = {{0.8, 0.2, 0.6}, {0.3, 0.7, 0.4}};
    mix.S = {0};
    mix.u = {0.1};
    ConsiderationState C;
    C.rows = {CsRow{1, 0, 1}};

    std::vector<double> direct(2, 0.0);
    for (int h = 0; h < 2; ++h) {
      double f = 1.0;
      for (int j = 0; j < J; ++j) f *= C.rows[0][j] ? mix.Q[h][j] : (1.0 - mix.Q[h][j]);
      direct[h] = mix.omega[h] * f;
    }
    const double z = direct[0] + direct[1];
    direct[0] /= z;
    direct[1] /= z;

    std::vector<double> freq(2, 0.0);
    Rng rng = Rng::derive(seed, {0x0f3u});
    for (long s = 0; s < assign_draws; ++s) {
      sample_slices(mix, rng);
      sample_assignments(mix, C, rng);
      freq[mix.S[0]] += 1.0;
    }
    for (auto& c : freq) c /= static_cast<double>(assign_draws);
    const double tv = tv_distance(freq, direct);
    out.push_back({"slice_assignment", tv, 0.01, tv < 0.01});
  }

  {
    // (c) subset masses sum to one for random normalized (omega, Q)
    Rng rng = Rng::derive(seed, {0x0f4u});
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const int J = 2 + static_cast<int>(rng.below(9));
      const int K = 1 + static_cast<int>(rng.below(4));
      std::vector<double> w(K);
      double s = 0.0;
      for (auto& v : w) {
        v = rng.uniform();
        s += v;
      }
      for (auto& v : w) v /= s;
      std::vector<std::vector<double>> Q(K, std::vector<double>(J));
      for (auto& row : Q)
        for (auto& q : row) q = rng.uniform();
      const MixturePmf pmf = mixture_cs_pmf(w, Q);
      double total = 0.0;
      for (double p : pmf.p) total += p;
      worst = std::max(worst, std::abs(total - 1.0));
    }
    out.push_back({"mixture_pmf_normalized", worst, 1e-12, worst < 1e-12});
  }

  return out;
}

}  // namespace csmix
