#pragma once

#include "csmix/rng.hpp"
#include "csmix/types.hpp"

#include <utility>
#include <vector>

namespace csmix {

// Occupancy counts n_h and per-(h,j) inclusion counts over the active
// components.
struct ClusterStats {
  std::vector<int> n_h;                // size kstar
  std::vector<std::vector<int>> incl;  // kstar x J

  static ClusterStats compute(const ConsiderationState& C, const std::vector<int>& S, int kstar, int J);
};

// Conjugate Beta posterior parameters for q_{hj}; exposed for testing.
std::pair<double, double> q_posterior_params(const ClusterStats& stats, const Hyperparams& hyper, int h, int j);

// q_{hj} ~ Beta(a_j + sum C_ij, b_j + sum (1-C_ij)) over members of h;
// empty components draw from the prior.
void sample_q(MixtureState& mix, const ClusterStats& stats, const Hyperparams& hyper, Rng& rng);

// V_h ~ Beta(1 + n_h, alpha + sum_{l>h} n_l); empty components from Beta(1, alpha).
void sample_sticks(MixtureState& mix, const ClusterStats& stats, Rng& rng);

// u_i ~ U(0, omega_{S_i}].
void sample_slices(MixtureState& mix, Rng& rng);

// Ensures K* = min{h : sum_{l<=h} omega_l > 1 - min_i u_i}: appends sticks
// and attention rows from their priors as needed, then truncates.
void extend_sticks(MixtureState& mix, const Hyperparams& hyper, Rng& rng);

// S_i drawn over {h <= K* : omega_h >= u_i} with the Bernoulli-product
// log-weights. Throws if a subject has no admissible component.
void sample_assignments(MixtureState& mix, const ConsiderationState& C, Rng& rng);

// Escobar-West update given G occupied components among n subjects.
double sample_alpha(int G, int n, double alpha_current, const Hyperparams& hyper, Rng& rng);

int count_occupied(const std::vector<int>& S, int kstar);

}  // namespace csmix
