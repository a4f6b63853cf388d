#include "csmix/simulate.hpp"

#include "csmix/logit.hpp"
#include "csmix/oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace csmix {

void SubsetPmf::validate() const {
  if (J < 1 || J > 31) throw std::invalid_argument("SubsetPmf: J out of range");
  if (masks.size() != probs.size() || masks.empty()) throw std::invalid_argument("SubsetPmf: empty");
  double s = 0.0;
  for (std::size_t k = 0; k < masks.size(); ++k) {
    if (masks[k] == 0) throw std::invalid_argument("SubsetPmf: empty set has no choice probability");
    if (masks[k] >= (1u << J)) throw std::invalid_argument("SubsetPmf: mask exceeds 2^J");
    if (probs[k] < 0.0) throw std::invalid_argument("SubsetPmf: negative probability");
    s += probs[k];
  }
  if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("SubsetPmf: probabilities do not sum to 1");
}

std::uint32_t SubsetPmf::sample(Rng& rng) const {
  const double t = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < masks.size(); ++k) {
    acc += probs[k];
    if (t <= acc) return masks[k];
  }
  return masks.back();
}

SubsetPmf SubsetPmf::parse(const std::string& text, int J) {
  SubsetPmf pmf;
  pmf.J = J;
  std::stringstream ss(text);
  std::string entry;
  while (std::getline(ss, entry, ';')) {
    const auto colon = entry.find(':');
    if (colon == std::string::npos) {
      if (entry.find_first_not_of(" \t") == std::string::npos) continue;
      throw std::invalid_argument("SubsetPmf: expected 'members:prob' in '" + entry + "'");
    }
    std::uint32_t mask = 0;
    std::stringstream ms(entry.substr(0, colon));
    std::string tok;
    while (std::getline(ms, tok, ',')) {
      const int j = std::stoi(tok);
      if (j < 1 || j > J) throw std::invalid_argument("SubsetPmf: member out of range");
      mask |= (1u << (j - 1));
    }
    pmf.masks.push_back(mask);
    pmf.probs.push_back(std::stod(entry.substr(colon + 1)));
  }
  pmf.validate();
  return pmf;
}

std::string SubsetPmf::format() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < masks.size(); ++k) {
    if (k) os << "; ";
    bool first = true;
    for (int j = 0; j < J; ++j) {
      if (masks[k] & (1u << j)) {
        if (!first) os << ',';
        os << (j + 1);
        first = false;
      }
    }
    os << ':' << probs[k];
  }
  return os.str();
}

namespace {

// Fills covariates x ~ N(0,2), sets z = x, and draws responses from the
// logit over the true consideration set with V = beta_star * x.
Simulated finish_simulation(int n, int T, int J, double beta_star, ConsiderationState truth, Rng& rng) {
  Simulated sim;
  sim.truth = std::move(truth);
  for (const auto& row : sim.truth.rows) {
    if (static_cast<int>(row.size()) != J || cs_size(row) == 0)
      throw std::logic_error("finish_simulation: truth rows inconsistent with J");
  }
  auto& data = sim.data;
  data.n = n;
  data.J = J;
  data.d_x = 1;
  data.d_z = 1;
  data.subjects.resize(n);

  const double sd = std::sqrt(2.0);
  std::vector<double> logits(J);
  for (int i = 0; i < n; ++i) {
    auto& sub = data.subjects[i];
    sub.y.resize(T);
    sub.x.resize(static_cast<std::size_t>(T) * J);
    const CsRow& cs = sim.truth.rows[i];
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < J; ++j) sub.x[static_cast<std::size_t>(t) * J + j] = sd * rng.normal();
      // categorical over the considered categories
      double m = kNegInf;
      for (int j = 0; j < J; ++j) {
        logits[j] = beta_star * sub.x[static_cast<std::size_t>(t) * J + j];
        if (cs[j]) m = std::max(m, logits[j]);
      }
      double total = 0.0;
      for (int j = 0; j < J; ++j)
        if (cs[j]) total += std::exp(logits[j] - m);
      const double u = rng.uniform() * total;
      double acc = 0.0;
      int pick = -1;
      for (int j = 0; j < J; ++j) {
        if (!cs[j]) continue;
        acc += std::exp(logits[j] - m);
        pick = j;
        if (u <= acc) break;
      }
      sub.y[t] = pick;
    }
    sub.z = sub.x;  // z = x, as in the application specification
  }
  return sim;
}

}  // namespace

Simulated simulate_small(int n, int T, int J, double beta_star, const SubsetPmf& cs_pmf,
                         std::uint64_t seed) {
  cs_pmf.validate();
  if (cs_pmf.J != J) throw std::invalid_argument("simulate_small: pmf J mismatch");
  Rng rng = Rng::derive(seed, {0x51u});
  ConsiderationState truth;
  truth.rows.resize(n);
  for (int i = 0; i < n; ++i) truth.rows[i] = cs_from_mask(cs_pmf.sample(rng), J);
  return finish_simulation(n, T, J, beta_star, std::move(truth), rng);
}

Simulated simulate_large_two_pop(int n, int J, int T, double beta_star, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, {0x52u});
  ConsiderationState truth;
  truth.rows.resize(n);
  for (int i = 0; i < n; ++i) {
    const bool first_pop = i < n / 2;
    CsRow row(J, 0);
    for (;;) {
      int count = 0;
      for (int j = 0; j < J; ++j) {
        // favored categories: 10,30,50,70,90 (first subpopulation) or
        // 20,40,60,80,100 (second), 1-based
        const int cat = j + 1;
        const bool favored = first_pop ? (cat % 20 == 10) : (cat % 20 == 0);
        const double p = favored ? 0.8 : 0.05;
        row[j] = rng.bernoulli(p) ? 1 : 0;
        count += row[j];
      }
      if (count > 0) break;  // the model excludes empty sets
    }
    truth.rows[i] = row;
  }
  return finish_simulation(n, T, J, beta_star, std::move(truth), rng);
}

PriorCsDraws simulate_prior_cs(const Hyperparams& hyper, int J, int K, int n_draws, std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("simulate_prior_cs: K must be positive");
  PriorCsDraws out;
  out.J = J;
  out.K = K;
  const bool small = J <= 20;
  out.residual.reserve(n_draws);
  out.item_incl.reserve(n_draws);
  if (small) out.subset_pmf.reserve(n_draws);

  std::vector<double> V(K), omega(K);
  std::vector<std::vector<double>> Q(K, std::vector<double>(J));
  for (int d = 0; d < n_draws; ++d) {
    Rng rng = Rng::derive(seed, {0x53u, static_cast<std::uint64_t>(d)});
    const double alpha = rng.gamma(hyper.a_alpha, hyper.b_alpha);
    double leftover = 1.0;
    for (int h = 0; h < K; ++h) {
      V[h] = rng.beta(1.0, alpha);
      omega[h] = V[h] * leftover;
      leftover *= (1.0 - V[h]);
    }
    for (int h = 0; h < K; ++h)
      for (int j = 0; j < J; ++j) Q[h][j] = rng.beta(hyper.a_q[j], hyper.b_q[j]);

    out.residual.push_back(leftover);
    // pmfs are reported under weights renormalized over the K kept
    // components; the raw truncation deficit lives in `residual`
    const double wsum = 1.0 - leftover;
    std::vector<double> wnorm(omega);
    for (double& w : wnorm) w /= wsum;
    std::vector<double> incl(J, 0.0);
    for (int h = 0; h < K; ++h)
      for (int j = 0; j < J; ++j) incl[j] += wnorm[h] * Q[h][j];
    out.item_incl.push_back(std::move(incl));
    if (small) out.subset_pmf.push_back(mixture_subset_masses(wnorm, Q));
  }
  return out;
}

}  // namespace csmix
