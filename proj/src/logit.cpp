#include "csmix/logit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csmix {

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;  // all -inf (or a +inf slipped in)
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

VectorXd utilities(const ResponseParams& params, const PanelDataset& data, int i, int t) {
  if (i < 0 || i >= data.n) throw std::out_of_range("utilities: subject index");
  if (t < 0 || t >= data.subjects[i].T()) throw std::out_of_range("utilities: occasion index");
  VectorXd V(data.J);
  for (int j = 0; j < data.J; ++j) {
    double v = params.delta[j];
    const double* x = data.x_at(i, t, j);
    for (int k = 0; k < data.d_x; ++k) v += x[k] * params.beta[k];
    const double* z = data.z_at(i, t, j);
    for (int k = 0; k < data.d_z; ++k) v += z[k] * params.b[i][k];
    V[j] = v;
  }
  return V;
}

double log_choice_prob(int j, const CsRow& C, const VectorXd& V) {
  const int J = static_cast<int>(C.size());
  if (j < 0 || j >= J) throw std::out_of_range("choice_prob: category index");
  if (cs_size(C) == 0) throw std::invalid_argument("choice_prob: empty consideration set");
  if (!C[j]) return kNegInf;
  double m = kNegInf;
  for (int l = 0; l < J; ++l)
    if (C[l]) m = std::max(m, V[l]);
  double s = 0.0;
  for (int l = 0; l < J; ++l)
    if (C[l]) s += std::exp(V[l] - m);
  return (V[j] - m) - std::log(s);
}

double choice_prob(int j, const CsRow& C, const VectorXd& V) {
  const double lp = log_choice_prob(j, C, V);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

double subject_loglik(const ResponseParams& params, const PanelDataset& data, const CsRow& C_i, int i) {
  const auto& sub = data.subjects[i];
  double ll = 0.0;
  for (int t = 0; t < sub.T(); ++t) {
    if (!C_i[sub.y[t]]) return kNegInf;
    const VectorXd V = utilities(params, data, i, t);
    ll += log_choice_prob(sub.y[t], C_i, V);
  }
  return ll;
}

double panel_loglik(const ResponseParams& params, const PanelDataset& data, const ConsiderationState& C) {
  double ll = 0.0;
  for (int i = 0; i < data.n; ++i) {
    const double li = subject_loglik(params, data, C.rows[i], i);
    if (li == kNegInf) return kNegInf;
    ll += li;
  }
  return ll;
}

}  // namespace csmix
