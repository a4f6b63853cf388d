#pragma once

#include "csmix/rng.hpp"
#include "csmix/types.hpp"

#include <vector>

namespace csmix {

// One logged coordinate proposal of the consideration-set M-H step.
struct CsProposal {
  int subject = 0;
  int coord = 0;
  std::uint8_t from = 0;
  std::uint8_t to = 0;
  double accept_prob = 0.0;
  bool accepted = false;
};

struct CsSweepResult {
  long proposals = 0;  // proposals with candidate != current
  long accepted = 0;
  double delta_loglik = 0.0;  // change in subject log-likelihood over the sweep
};

// Unnormalized log conditional of C_i: subject log-likelihood plus the
// Bernoulli(q_j) prior terms, -inf when forced inclusion is violated.
// Throws when a q entry lies outside [0,1].
double conditional_cs_logpmf(int i, const CsRow& C_i, const ResponseParams& params,
                             const std::vector<double>& q_row, const PanelDataset& data,
                             const CsRow& forced_i);

// One M-H sweep over the coordinates of C_i in a fresh random order.
// Coordinates with an observed response are pinned at 1; the rest are
// proposed from Bernoulli(q_j) and accepted with the likelihood ratio.
// Exclusion proposals are accepted with probability exactly 1.
CsSweepResult mh_update_cs(int i, CsRow& C_i, const ResponseParams& params,
                           const std::vector<double>& q_row, const PanelDataset& data,
                           const CsRow& forced_i, Rng& rng,
                           std::vector<CsProposal>* proposal_log = nullptr);

}  // namespace csmix
