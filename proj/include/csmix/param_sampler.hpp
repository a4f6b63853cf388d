#pragma once

#include "csmix/rng.hpp"
#include "csmix/types.hpp"

namespace csmix {

// Mode + curvature of the conditional target, used as an independence
// proposal. cov already includes the variance scale multiplier.
struct TailoredProposal {
  VectorXd mode;
  MatrixXd cov;
  double scale = 1.0;
  int iterations = 0;
  bool converged = false;
};

struct Tailored1D {
  double mode = 0.0;
  double var = 0.0;
  double scale = 1.0;
  int iterations = 0;
  bool converged = false;
};

struct BlockResult {
  long proposals = 0;
  long accepted = 0;
  long fallbacks = 0;         // Newton failures that fell back to a random walk
  double delta_loglik = 0.0;  // change in the panel log-likelihood
};

// M-H accept rule on the log scale. A zero log-ratio (identical candidate)
// always accepts; -inf (structural zero) never does and is never fed to exp.
bool mh_accept(double log_ratio, Rng& rng);

// Conditional log-likelihood of beta given (delta, {b_i}, {C_i}); prior excluded.
double beta_conditional_loglik(const VectorXd& beta, const ResponseParams& params,
                               const ConsiderationState& C, const PanelDataset& data);

// Newton-Raphson mode and curvature of log L(beta|.) + log prior.
TailoredProposal tailor_beta(const ResponseParams& params, const ConsiderationState& C,
                             const PanelDataset& data, const Hyperparams& hyper);

BlockResult sample_beta(ResponseParams& params, const ConsiderationState& C, const PanelDataset& data,
                        const Hyperparams& hyper, Rng& rng);

// Conditional log target (likelihood + prior) of delta_k with the other
// coordinates fixed; used by the 1-d tailored step and by tests.
double delta_conditional_logtarget(int k, double value, const ResponseParams& params,
                                   const ConsiderationState& C, const PanelDataset& data,
                                   const Hyperparams& hyper);

Tailored1D tailor_delta(int k, const ResponseParams& params, const ConsiderationState& C,
                        const PanelDataset& data, const Hyperparams& hyper);

// Updates delta_1..delta_{J-1} one at a time in a fresh random order;
// delta_J stays pinned at 0.
BlockResult sample_delta(ResponseParams& params, const ConsiderationState& C, const PanelDataset& data,
                         const Hyperparams& hyper, Rng& rng);

// Symmetric random-walk M-H per subject with proposal N(b_i, D); per-subject
// streams derived from (seed, iter) so the block parallelizes deterministically.
BlockResult sample_b(ResponseParams& params, const ConsiderationState& C, const PanelDataset& data,
                     const Hyperparams& hyper, std::uint64_t seed, std::uint64_t iter, int threads);

// W ~ Wishart(df, scale) by the Bartlett construction; E[W] = df * scale.
MatrixXd wishart_draw(double df, const MatrixXd& scale, Rng& rng);

// D^{-1} ~ Wishart(v + n, [R^{-1} + sum b_i b_i']^{-1}); stores D = W^{-1}.
void sample_D(ResponseParams& params, const Hyperparams& hyper, Rng& rng);

// Central finite-difference validation of the analytic Newton derivatives.
struct DerivCheck {
  double max_rel_grad = 0.0;
  double max_rel_hess = 0.0;
};
DerivCheck check_beta_derivatives(const VectorXd& at, const ResponseParams& params,
                                  const ConsiderationState& C, const PanelDataset& data,
                                  const Hyperparams& hyper);
DerivCheck check_delta_derivatives(int k, double at, const ResponseParams& params,
                                   const ConsiderationState& C, const PanelDataset& data,
                                   const Hyperparams& hyper);

}  // namespace csmix
