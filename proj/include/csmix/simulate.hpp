#pragma once

#include "csmix/rng.hpp"
#include "csmix/types.hpp"

#include <string>
#include <vector>

namespace csmix {

// A pmf over nonempty subsets of {1..J}, subsets encoded as J-bit masks.
struct SubsetPmf {
  int J = 0;
  std::vector<std::uint32_t> masks;
  std::vector<double> probs;

  void validate() const;  // nonempty masks, probabilities summing to 1 (tol 1e-9)
  std::uint32_t sample(Rng& rng) const;

  // "1,2:0.3; 1,2,3:0.4; 2,3,4:0.3" with 1-based members.
  static SubsetPmf parse(const std::string& text, int J);
  std::string format() const;
};

struct Simulated {
  PanelDataset data;
  ConsiderationState truth;
};

// True sets from cs_pmf, covariates x_ijt ~ N(0,2) iid with z = x, responses
// from the logit with V = beta_star * x (delta = 0, b = 0).
Simulated simulate_small(int n, int T, int J, double beta_star, const SubsetPmf& cs_pmf,
                         std::uint64_t seed);

// Two subpopulations of independent Bernoulli considerers: probability 0.05
// everywhere except five favored categories at 0.8 ({10,30,50,70,90} for
// subjects 1..n/2, {20,40,60,80,100} scaled to J for the rest). Empty draws
// are redrawn.
Simulated simulate_large_two_pop(int n, int J, int T, double beta_star, std::uint64_t seed);

// Draws from the prior over consideration-set distributions, truncated at K
// components. For J <= 20 each draw carries the full subset pmf; item
// inclusion probabilities and the truncation residual are always recorded.
struct PriorCsDraws {
  int J = 0;
  int K = 0;
  std::vector<double> residual;                  // per draw: 1 - sum_h omega_h
  std::vector<std::vector<double>> subset_pmf;   // per draw, size 2^J (J <= 20 only)
  std::vector<std::vector<double>> item_incl;    // per draw, length J
};
PriorCsDraws simulate_prior_cs(const Hyperparams& hyper, int J, int K, int n_draws, std::uint64_t seed);

}  // namespace csmix
