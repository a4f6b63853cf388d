#pragma once

#include "csmix/chain_store.hpp"
#include "csmix/types.hpp"

#include <vector>

namespace csmix {

// n x J posterior means of 1{j in C_i}; observed responses give exact 1.
MatrixXd inclusion_probs(const ChainStore& chain);

// Threshold rule: category j enters the point estimate when its inclusion
// probability strictly exceeds the threshold (ties excluded).
std::vector<std::vector<int>> cs_point_estimate(const MatrixXd& incl, double threshold = 0.5);

// n x n posterior co-clustering probabilities Pr(S_i = S_i'); symmetric,
// unit diagonal, invariant to per-draw relabeling.
MatrixXd similarity_matrix(const ChainStore& chain);

// Per-draw subset pmfs from (omega, Q), summarized pointwise. The deficit is
// the mean empty-set plus truncation mass, reported rather than renormalized.
struct MarginalCsSummary {
  std::vector<double> mean;  // size 2^J, mask-indexed; entry 0 unused
  std::vector<double> q025;
  std::vector<double> q975;
  double mean_deficit = 0.0;
};
MarginalCsSummary marginal_cs_distribution(const ChainStore& chain);

// J x J mean co-inclusion probabilities Pr(C_ij = 1, C_il = 1), averaged
// over subjects; the large-J substitute for the full subset pmf.
MatrixXd coinclusion_probs(const ChainStore& chain);

// Log predictive likelihood per holdout subject: draws are averaged in
// probability space, then logged. subject_ids[k] is the 0-based estimation
// index of holdout subject k; throws on unknown ids.
std::vector<double> predictive_loglik(const ChainStore& chain, const PanelDataset& holdout,
                                      const std::vector<int>& subject_ids);

}  // namespace csmix
