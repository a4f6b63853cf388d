#include "csmix/types.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace csmix {

PanelDataset augment_outside_option(const PanelDataset& data) {
  if (data.outside_option) return data;
  PanelDataset out;
  out.n = data.n;
  out.J = data.J + 1;
  out.d_x = data.d_x;
  out.d_z = data.d_z;
  out.outside_option = true;
  out.subjects.resize(data.n);
  for (int i = 0; i < data.n; ++i) {
    const auto& s = data.subjects[i];
    auto& o = out.subjects[i];
    o.y = s.y;
    const int T = s.T();
    o.x.assign(static_cast<std::size_t>(T) * out.J * out.d_x, 0.0);
    o.z.assign(static_cast<std::size_t>(T) * out.J * out.d_z, 0.0);
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < data.J; ++j) {
        for (int k = 0; k < out.d_x; ++k)
          o.x[(static_cast<std::size_t>(t) * out.J + j) * out.d_x + k] = data.x_at(i, t, j)[k];
        for (int k = 0; k < out.d_z; ++k)
          o.z[(static_cast<std::size_t>(t) * out.J + j) * out.d_z + k] = data.z_at(i, t, j)[k];
      }
    }
  }
  return out;
}

std::string Violation::str() const {
  std::ostringstream os;
  os << what;
  if (subject > 0) os << " [subject " << subject;
  if (occasion > 0) os << ", occasion " << occasion;
  if (category > 0) os << ", category " << category;
  if (subject > 0) os << "]";
  return os.str();
}

std::vector<Violation> validate_dataset(const PanelDataset& data) {
  std::vector<Violation> out;
  if (static_cast<int>(data.subjects.size()) != data.n)
    out.push_back({"subject count mismatch", 0, 0, 0});
  if (data.J < 1) out.push_back({"J must be at least 1", 0, 0, 0});
  const int n = static_cast<int>(data.subjects.size());
  for (int i = 0; i < n; ++i) {
    const auto& s = data.subjects[i];
    const int T = s.T();
    if (T < 1) {
      out.push_back({"subject has no occasions", i + 1, 0, 0});
      continue;
    }
    for (int t = 0; t < T; ++t) {
      if (s.y[t] < 0 || s.y[t] >= data.J)
        out.push_back({"response out of range", i + 1, t + 1, s.y[t] + 1});
    }
    const std::size_t want_x = static_cast<std::size_t>(T) * data.J * data.d_x;
    const std::size_t want_z = static_cast<std::size_t>(T) * data.J * data.d_z;
    if (s.x.size() != want_x) {
      out.push_back({"covariate array x has wrong size", i + 1, 0, 0});
      continue;
    }
    if (s.z.size() != want_z) {
      out.push_back({"covariate array z has wrong size", i + 1, 0, 0});
      continue;
    }
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < data.J; ++j) {
        for (int k = 0; k < data.d_x; ++k) {
          if (std::isnan(data.x_at(i, t, j)[k])) {
            out.push_back({"missing covariate x", i + 1, t + 1, j + 1});
            break;
          }
        }
        for (int k = 0; k < data.d_z; ++k) {
          if (std::isnan(data.z_at(i, t, j)[k])) {
            out.push_back({"missing covariate z", i + 1, t + 1, j + 1});
            break;
          }
        }
      }
    }
  }
  return out;
}

ConsiderationState ConsiderationState::full(int n, int J) {
  ConsiderationState cs;
  cs.rows.assign(n, CsRow(J, 1));
  return cs;
}

std::vector<int> cs_members(const CsRow& row) {
  std::vector<int> m;
  for (int j = 0; j < static_cast<int>(row.size()); ++j)
    if (row[j]) m.push_back(j);
  return m;
}

int cs_size(const CsRow& row) {
  int c = 0;
  for (auto v : row) c += (v != 0);
  return c;
}

std::uint32_t cs_mask(const CsRow& row) {
  if (row.size() > 20) throw std::invalid_argument("cs_mask: J > 20");
  std::uint32_t m = 0;
  for (std::size_t j = 0; j < row.size(); ++j)
    if (row[j]) m |= (1u << j);
  return m;
}

CsRow cs_from_mask(std::uint32_t mask, int J) {
  CsRow row(J, 0);
  for (int j = 0; j < J; ++j)
    if (mask & (1u << j)) row[j] = 1;
  return row;
}

std::string cs_bits_string(const CsRow& row) {
  std::string s(row.size(), '0');
  for (std::size_t j = 0; j < row.size(); ++j)
    if (row[j]) s[j] = '1';
  return s;
}

CsRow cs_from_bits_string(const std::string& bits) {
  CsRow row(bits.size(), 0);
  for (std::size_t j = 0; j < bits.size(); ++j) row[j] = (bits[j] == '1');
  return row;
}

std::vector<CsRow> forced_mask(const PanelDataset& data) {
  std::vector<CsRow> forced(data.n, CsRow(data.J, 0));
  for (int i = 0; i < data.n; ++i) {
    for (int yv : data.subjects[i].y) forced[i][yv] = 1;
    if (data.outside_option) forced[i][data.J - 1] = 1;
  }
  return forced;
}

bool satisfies_forced(const CsRow& row, const CsRow& forced) {
  for (std::size_t j = 0; j < row.size(); ++j)
    if (forced[j] && !row[j]) return false;
  return true;
}

ResponseParams ResponseParams::zeros(int n, int J, int d_x, int d_z) {
  ResponseParams p;
  p.delta = VectorXd::Zero(J);
  p.beta = VectorXd::Zero(d_x);
  p.b.assign(n, VectorXd::Zero(d_z));
  p.D = MatrixXd::Identity(d_z, d_z);
  return p;
}

void MixtureState::recompute_weights() {
  omega.resize(V.size());
  double leftover = 1.0;
  for (std::size_t h = 0; h < V.size(); ++h) {
    omega[h] = V[h] * leftover;
    leftover *= (1.0 - V[h]);
  }
}

double MixtureState::weight_sum() const {
  double s = 0.0;
  for (double w : omega) s += w;
  return s;
}

void Hyperparams::set_q_sparsity(int J, double s, double r0) {
  const double r = r0 / J;
  if (!(s > 0.0) || !(r > 0.0) || !(r < 1.0))
    throw std::invalid_argument("set_q_sparsity: need s > 0 and 0 < r0/J < 1");
  a_q.assign(J, s * r);
  b_q.assign(J, s * (1.0 - r));
}

Hyperparams Hyperparams::defaults(int J, int d_z) {
  Hyperparams h;
  h.set_q_sparsity(J, 1.0, 1.0);
  const int dz = std::max(d_z, 1);
  h.wishart_v = dz + 6.0;  // gives (9, (1/9) I) at d_z = 3
  h.wishart_R = MatrixXd::Identity(dz, dz) / h.wishart_v;
  return h;
}

void Hyperparams::validate(int d_z) const {
  auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!pos(a_alpha) || !pos(b_alpha)) throw std::invalid_argument("alpha prior parameters must be positive");
  for (double v : a_q)
    if (!pos(v)) throw std::invalid_argument("a_q entries must be positive");
  for (double v : b_q)
    if (!pos(v)) throw std::invalid_argument("b_q entries must be positive");
  if (!pos(v_delta) || !pos(v_beta)) throw std::invalid_argument("delta/beta prior variances must be positive");
  if (!pos(proposal_scale)) throw std::invalid_argument("proposal_scale must be positive");
  if (d_z > 0) {
    if (wishart_v < d_z) throw std::invalid_argument("wishart_v must be >= d_z");
    if (wishart_R.rows() != d_z || wishart_R.cols() != d_z)
      throw std::invalid_argument("wishart_R must be d_z x d_z");
  }
}

}  // namespace csmix
