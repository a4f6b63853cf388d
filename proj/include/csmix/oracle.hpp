#pragma once

#include "csmix/types.hpp"

#include <span>
#include <vector>

namespace csmix {

// Enumeration guard: 2^20 subsets is the largest exact computation we run.
inline constexpr int kEnumGuardJ = 20;

// Subset masses sum_h w_h prod_{j in c} q_hj prod_{j notin c} (1-q_hj) for
// every mask c in [0, 2^J); no normalization requirement on w.
std::vector<double> mixture_subset_masses(std::span<const double> w,
                                          const std::vector<std::vector<double>>& Q);

struct MixturePmf {
  std::vector<double> p;  // size 2^J, indexed by subset mask (bit j = category j+1)
  double empty_mass = 0.0;
};

// Exact pmf over all 2^J subsets for stick weights summing to 1 (tol 1e-9);
// the empty set's mass is reported separately. Throws when J exceeds the
// enumeration guard.
MixturePmf mixture_cs_pmf(std::span<const double> omega, const std::vector<std::vector<double>>& Q);

// Exact conditional posterior of C_i over all nonempty subsets, normalized.
// Subsets violating forced inclusion (and the empty set) get exactly 0.
std::vector<double> enumerate_cs_posterior(int i, const ResponseParams& params,
                                           const std::vector<double>& q_row, const PanelDataset& data,
                                           const CsRow& forced_i);

// Pr(Y_it = j) marginalized over nonempty consideration sets; cs_pmf is
// mask-indexed and is renormalized over nonempty sets if it carries mass on
// the empty set.
double marginal_response_prob(int j, const ResponseParams& params, const PanelDataset& data, int i,
                              int t, std::span<const double> cs_pmf);

// Total-variation distance between two pmfs on the same support.
double tv_distance(std::span<const double> a, std::span<const double> b);

// Sampler-vs-oracle equivalence checks on micro-fixtures:
//   cs_sampler_stationary  — M-H sweep law vs the enumerated conditional (J=3)
//   slice_assignment       — slice-sampled S law vs the direct categorical
//   mixture_pmf_normalized — subset masses summing to 1 on random (omega, Q)
struct OracleCheckReport {
  std::string name;
  double observed = 0.0;
  double threshold = 0.0;
  bool pass = false;
};
std::vector<OracleCheckReport> run_oracle_checks(std::uint64_t seed, long cs_sweeps = 200000,
                                                 long assign_draws = 100000);

}  // namespace csmix
