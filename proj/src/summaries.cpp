#include "csmix/summaries.hpp"

#include "csmix/logit.hpp"
#include "csmix/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csmix {

namespace {
void require_draws(const ChainStore& chain) {
  if (chain.draws.empty()) throw std::invalid_argument("summaries: chain has no draws");
}

double percentile(std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}
}  // namespace

MatrixXd inclusion_probs(const ChainStore& chain) {
  require_draws(chain);
  MatrixXd incl = MatrixXd::Zero(chain.n, chain.J);
  for (const auto& d : chain.draws)
    for (int i = 0; i < chain.n; ++i)
      for (int j = 0; j < chain.J; ++j) incl(i, j) += d.C[i][j];
  incl /= static_cast<double>(chain.num_draws());
  return incl;
}

std::vector<std::vector<int>> cs_point_estimate(const MatrixXd& incl, double threshold) {
  std::vector<std::vector<int>> out(incl.rows());
  for (int i = 0; i < incl.rows(); ++i)
    for (int j = 0; j < incl.cols(); ++j)
      if (incl(i, j) > threshold) out[i].push_back(j);
  return out;
}

MatrixXd similarity_matrix(const ChainStore& chain) {
  require_draws(chain);
  const int n = chain.n;
  MatrixXd sim = MatrixXd::Zero(n, n);
  for (const auto& d : chain.draws)
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k)
        if (d.S[i] == d.S[k]) sim(i, k) += 1.0;
  sim /= static_cast<double>(chain.num_draws());
  for (int i = 0; i < n; ++i) {
    sim(i, i) = 1.0;
    for (int k = i + 1; k < n; ++k) sim(k, i) = sim(i, k);
  }
  return sim;
}

MarginalCsSummary marginal_cs_distribution(const ChainStore& chain) {
  require_draws(chain);
  if (chain.J > kEnumGuardJ)
    throw std::invalid_argument("marginal_cs_distribution: J exceeds enumeration guard (20)");
  const std::size_t total = std::size_t{1} << chain.J;
  const int G = chain.num_draws();
  std::vector<std::vector<double>> per_draw(G);
  for (int g = 0; g < G; ++g) per_draw[g] = mixture_subset_masses(chain.draws[g].omega, chain.draws[g].Q);

  MarginalCsSummary out;
  out.mean.assign(total, 0.0);
  out.q025.assign(total, 0.0);
  out.q975.assign(total, 0.0);
  std::vector<double> vals(G);
  for (std::size_t mask = 1; mask < total; ++mask) {
    for (int g = 0; g < G; ++g) vals[g] = per_draw[g][mask];
    double s = 0.0;
    for (double v : vals) s += v;
    out.mean[mask] = s / G;
    std::sort(vals.begin(), vals.end());
    out.q025[mask] = percentile(vals, 0.025);
    out.q975[mask] = percentile(vals, 0.975);
  }
  double covered = 0.0;
  for (std::size_t mask = 1; mask < total; ++mask) covered += out.mean[mask];
  out.mean_deficit = 1.0 - covered;
  return out;
}

MatrixXd coinclusion_probs(const ChainStore& chain) {
  require_draws(chain);
  const int J = chain.J;
  MatrixXd co = MatrixXd::Zero(J, J);
  for (const auto& d : chain.draws) {
    for (int i = 0; i < chain.n; ++i) {
      const CsRow& row = d.C[i];
      for (int j = 0; j < J; ++j) {
        if (!row[j]) continue;
        for (int l = 0; l < J; ++l)
          if (row[l]) co(j, l) += 1.0;
      }
    }
  }
  co /= static_cast<double>(chain.num_draws()) * chain.n;
  return co;
}

std::vector<double> predictive_loglik(const ChainStore& chain, const PanelDataset& holdout,
                                      const std::vector<int>& subject_ids) {
  require_draws(chain);
  if (static_cast<int>(subject_ids.size()) != holdout.n)
    throw std::invalid_argument("predictive_loglik: one estimation id per holdout subject required");
  for (int id : subject_ids)
    if (id < 0 || id >= chain.n) throw std::invalid_argument("predictive_loglik: unknown subject id");
  if (holdout.J != chain.J) throw std::invalid_argument("predictive_loglik: category count mismatch");
  if (holdout.d_x != chain.d_x || (chain.has_re && holdout.d_z != chain.d_z))
    throw std::invalid_argument("predictive_loglik: covariate dimension mismatch");

  const int G = chain.num_draws();
  std::vector<double> out(holdout.n, 0.0);
  std::vector<double> lg(G);
  std::vector<double> vs(holdout.J);
  const VectorXd zero_b = VectorXd::Zero(holdout.d_z);
  for (int k = 0; k < holdout.n; ++k) {
    const int i_est = subject_ids[k];
    const auto& sub = holdout.subjects[k];
    if (sub.T() == 0) {
      out[k] = 0.0;  // empty product
      continue;
    }
    for (int g = 0; g < G; ++g) {
      const ChainDraw& d = chain.draws[g];
      const VectorXd& b = chain.has_re ? d.b[i_est] : zero_b;
      const CsRow& row = d.C[i_est];
      // evaluate on a one-subject view of the holdout data
      double ll = 0.0;
      for (int t = 0; t < sub.T() && ll != kNegInf; ++t) {
        double m = kNegInf;
        double vy = kNegInf;
        double denom = 0.0;
        if (!row[sub.y[t]]) {
          ll = kNegInf;
          break;
        }
        for (int j = 0; j < holdout.J; ++j) {
          if (!row[j]) continue;
          double v = d.delta[j];
          const double* x = holdout.x_at(k, t, j);
          for (int c = 0; c < holdout.d_x; ++c) v += x[c] * d.beta[c];
          const double* z = holdout.z_at(k, t, j);
          for (int c = 0; c < holdout.d_z && c < b.size(); ++c) v += z[c] * b[c];
          vs[j] = v;
          m = std::max(m, v);
          if (j == sub.y[t]) vy = v;
        }
        for (int j = 0; j < holdout.J; ++j)
          if (row[j]) denom += std::exp(vs[j] - m);
        ll += (vy - m) - std::log(denom);
      }
      lg[g] = ll;
    }
    // average in probability space, per the predictive-likelihood estimator
    double m = kNegInf;
    for (double v : lg) m = std::max(m, v);
    if (m == kNegInf) {
      out[k] = kNegInf;
      continue;
    }
    double s = 0.0;
    for (double v : lg) s += (v == kNegInf) ? 0.0 : std::exp(v - m);
    out[k] = m + std::log(s) - std::log(static_cast<double>(G));
  }
  return out;
}

}  // namespace csmix
