#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace csmix {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One subject's response sequence and covariates. Categories are 0-based
// internally; all external formats are 1-based.
struct SubjectData {
  std::vector<int> y;      // length T, responses in {0,...,J-1}
  std::vector<double> x;   // [(t*J + j)*d_x + k]
  std::vector<double> z;   // [(t*J + j)*d_z + k]
  int T() const { return static_cast<int>(y.size()); }
};

// Panel of n subjects choosing among J categories; unbalanced T_i allowed.
struct PanelDataset {
  int n = 0;
  int J = 0;
  int d_x = 0;
  int d_z = 0;
  bool outside_option = false;  // when true the last category is force-included
  std::vector<SubjectData> subjects;

  const double* x_at(int i, int t, int j) const {
    return subjects[i].x.data() + (static_cast<std::size_t>(t) * J + j) * d_x;
  }
  const double* z_at(int i, int t, int j) const {
    return subjects[i].z.data() + (static_cast<std::size_t>(t) * J + j) * d_z;
  }
  long total_obs() const {
    long s = 0;
    for (const auto& sub : subjects) s += sub.T();
    return s;
  }
};

// Adds a final category with zero covariates (the always-considered outside
// good) unless the dataset already carries one.
PanelDataset augment_outside_option(const PanelDataset& data);

struct Violation {
  std::string what;
  int subject = 0;   // 1-based, 0 = n/a
  int occasion = 0;  // 1-based, 0 = n/a
  int category = 0;  // 1-based, 0 = n/a
  std::string str() const;
};

// Empty iff all dataset invariants hold; violations are data, not faults.
std::vector<Violation> validate_dataset(const PanelDataset& data);

// Per-subject binary inclusion vector C_i; the set view is {j : C_ij = 1}.
using CsRow = std::vector<std::uint8_t>;

struct ConsiderationState {
  std::vector<CsRow> rows;  // n rows of length J
  static ConsiderationState full(int n, int J);
  int n() const { return static_cast<int>(rows.size()); }
};

std::vector<int> cs_members(const CsRow& row);                // 0-based members
int cs_size(const CsRow& row);
std::uint32_t cs_mask(const CsRow& row);                      // requires J <= 20
CsRow cs_from_mask(std::uint32_t mask, int J);
std::string cs_bits_string(const CsRow& row);                 // "0110..."
CsRow cs_from_bits_string(const std::string& bits);

// forced[i][j] = 1 iff some response of subject i equals j (plus the outside
// good when the dataset carries one). Sets with a forced coordinate at 0 have
// zero posterior probability.
std::vector<CsRow> forced_mask(const PanelDataset& data);
bool satisfies_forced(const CsRow& row, const CsRow& forced);

// Response-model parameters; delta is stored full length with delta[J-1]
// pinned at 0.
struct ResponseParams {
  VectorXd delta;           // length J
  VectorXd beta;            // length d_x
  std::vector<VectorXd> b;  // n vectors of length d_z
  MatrixXd D;               // d_z x d_z SPD

  static ResponseParams zeros(int n, int J, int d_x, int d_z);
};

// Slice-sampler state of the Dirichlet-process mixture, stored densely over
// the active components 1..K*.
struct MixtureState {
  int kstar = 0;
  std::vector<double> V;                 // size kstar, entries in (0,1)
  std::vector<double> omega;             // size kstar, stick-breaking weights
  std::vector<std::vector<double>> Q;    // kstar rows of length J
  std::vector<int> S;                    // n assignments, 0-based
  std::vector<double> u;                 // n slice variables
  double alpha = 1.0;

  // omega_h = V_h * prod_{l<h} (1 - V_l)
  void recompute_weights();
  double weight_sum() const;
};

struct Hyperparams {
  double a_alpha = 2.0;
  double b_alpha = 4.0;
  std::vector<double> a_q;  // length J
  std::vector<double> b_q;
  double v_delta = 3.0;     // prior variance of each delta_k
  double v_beta = 3.0;      // prior variance of each beta component
  double wishart_v = 0.0;   // degrees of freedom for D^{-1} ~ Wishart(v, R)
  MatrixXd wishart_R;
  double proposal_scale = 1.0;  // multiplier on tailored proposal covariance
  int newton_max_iter = 50;
  double newton_tol = 1e-8;

  // Sparsity parameterization a = s*r, b = s*(1-r) with r = r0/J.
  void set_q_sparsity(int J, double s, double r0);

  static Hyperparams defaults(int J, int d_z);
  void validate(int d_z) const;  // throws std::invalid_argument
};

}  // namespace csmix
