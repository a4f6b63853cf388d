#pragma once

#include "csmix/types.hpp"

#include <span>

namespace csmix {

// log(sum_k exp(v_k)) with the usual max shift.
double log_sum_exp(std::span<const double> v);

// Representative utilities V_ijt = delta_j + x'beta + z'b_i for all j.
VectorXd utilities(const ResponseParams& params, const PanelDataset& data, int i, int t);

// Pr(Y = j | C, V): exp(V_j) / sum_{l in C} exp(V_l) if j in C, exactly 0
// otherwise. Throws on an empty consideration set.
double choice_prob(int j, const CsRow& C, const VectorXd& V);
double log_choice_prob(int j, const CsRow& C, const VectorXd& V);  // -inf when j not in C

// sum_t log Pr(y_it | C_i, V_it); -inf when some response lies outside C_i.
double subject_loglik(const ResponseParams& params, const PanelDataset& data, const CsRow& C_i, int i);

double panel_loglik(const ResponseParams& params, const PanelDataset& data, const ConsiderationState& C);

}  // namespace csmix
