#include "csmix/cs_sampler.hpp"

#include "csmix/logit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csmix {

namespace {
constexpr double kQClamp = 1e-12;

inline double clamp_q(double q) { return std::clamp(q, kQClamp, 1.0 - kQClamp); }
}  // namespace

double conditional_cs_logpmf(int i, const CsRow& C_i, const ResponseParams& params,
                             const std::vector<double>& q_row, const PanelDataset& data,
                             const CsRow& forced_i) {
  for (double q : q_row)
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("conditional_cs_logpmf: q outside [0,1]");
  if (!satisfies_forced(C_i, forced_i)) return kNegInf;
  if (cs_size(C_i) == 0) return kNegInf;
  double lp = subject_loglik(params, data, C_i, i);
  if (lp == kNegInf) return kNegInf;
  for (int j = 0; j < data.J; ++j) {
    const double q = clamp_q(q_row[j]);
    lp += C_i[j] ? std::log(q) : std::log1p(-q);
  }
  return lp;
}

CsSweepResult mh_update_cs(int i, CsRow& C_i, const ResponseParams& params,
                           const std::vector<double>& q_row, const PanelDataset& data,
                           const CsRow& forced_i, Rng& rng,
                           std::vector<CsProposal>* proposal_log) {
  const auto& sub = data.subjects[i];
  const int J = data.J;
  const int T = sub.T();
  CsSweepResult res;

  // Utilities shifted by the per-occasion max over all J categories; the
  // shift is independent of the current set, so flipping a bit changes each
  // occasion's denominator by +/- one cached term.
  std::vector<double> expu(static_cast<std::size_t>(J) * T);
  std::vector<double> denom(T);
  for (int t = 0; t < T; ++t) {
    const VectorXd V = utilities(params, data, i, t);
    const double m = V.maxCoeff();
    double d = 0.0;
    for (int j = 0; j < J; ++j) {
      const double e = std::exp(V[j] - m);
      expu[static_cast<std::size_t>(j) * T + t] = e;
      if (C_i[j]) d += e;
    }
    denom[t] = d;
  }

  auto refresh_denom = [&](int t) {
    double d = 0.0;
    for (int j = 0; j < J; ++j)
      if (C_i[j]) d += expu[static_cast<std::size_t>(j) * T + t];
    denom[t] = d;
  };

  const std::vector<int> order = rng.permutation(J);
  for (int j : order) {
    const std::uint8_t cur = C_i[j];
    std::uint8_t cand;
    if (forced_i[j]) {
      cand = 1;  // f(C_ij | exists t: y_it = j) is degenerate at 1
    } else {
      cand = rng.bernoulli(clamp_q(q_row[j])) ? 1 : 0;
    }

    if (cand == cur) {
      // identical likelihoods; nothing to evaluate
      if (proposal_log) proposal_log->push_back({i, j, cur, cand, 1.0, true});
      continue;
    }

    // Likelihood ratio from the denominator change alone: the numerator
    // utilities of the observed responses are unaffected by the flip.
    double dll = 0.0;
    bool bad = false;
    for (int t = 0; t < T; ++t) {
      const double e = expu[static_cast<std::size_t>(j) * T + t];
      const double r = e / denom[t];
      if (cand) {
        dll -= std::log1p(r);
      } else {
        if (r >= 1.0 - 1e-9) {  // removing nearly all mass; recompute exactly
          bad = true;
          break;
        }
        dll -= std::log1p(-r);
      }
    }
    if (bad) {
      CsRow trial = C_i;
      trial[j] = cand;
      const double cur_ll = subject_loglik(params, data, C_i, i);
      const double cand_ll = subject_loglik(params, data, trial, i);
      dll = (cand_ll == kNegInf) ? kNegInf : cand_ll - cur_ll;
    }
    // an exclusion never shrinks the likelihood (denominators only drop)
    if (!cand && dll < 0.0) dll = 0.0;

    const double accept_prob = (dll == kNegInf) ? 0.0 : std::exp(std::min(0.0, dll));
    const bool accepted = (dll >= 0.0) || (dll != kNegInf && std::log(rng.uniform()) < dll);
    ++res.proposals;
    if (accepted) {
      ++res.accepted;
      C_i[j] = cand;
      res.delta_loglik += dll;
      for (int t = 0; t < T; ++t) {
        const double e = expu[static_cast<std::size_t>(j) * T + t];
        denom[t] += cand ? e : -e;
        if (denom[t] <= 0.0) refresh_denom(t);
      }
    }
    if (proposal_log) proposal_log->push_back({i, j, cur, cand, accept_prob, accepted});
  }
  return res;
}

}  // namespace csmix
