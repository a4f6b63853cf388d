#pragma once

#include "csmix/chain_store.hpp"
#include "csmix/cs_sampler.hpp"
#include "csmix/rng.hpp"
#include "csmix/types.hpp"

#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

namespace csmix {

// The four model variants: random effects on/off, consideration-set
// heterogeneity on/off.
enum class Variant { mnl, mnl_r, mnl_c, mnl_rc };

bool variant_has_re(Variant v);
bool variant_has_cs(Variant v);
Variant parse_variant(const std::string& name);  // throws on unknown name
std::string variant_name(Variant v);

struct FitOptions {
  long iters = 1000;
  long burnin = -1;  // -1: 20% of iters
  int thin = 1;
  std::uint64_t seed = 0;
  Variant variant = Variant::mnl_rc;
  int threads = 1;
  // cap on the initial number of mixture components; the starting partition
  // itself comes from leader clustering of the observed-response sets
  // (0 = min(n, 50))
  int init_clusters = 0;
  bool debug_checks = false;
  std::string cs_proposal_log;  // CSV path; empty disables logging
  long accept_window = 1000;
};

struct SamplerState {
  ResponseParams params;
  ConsiderationState C;
  MixtureState mix;
  double panel_ll = 0.0;
  long iter = 0;
};

// Thrown when the running log-likelihood turns NaN; carries the iteration.
struct NumericalAbort : std::runtime_error {
  long iter;
  explicit NumericalAbort(long it)
      : std::runtime_error("NaN in likelihood at iteration " + std::to_string(it)), iter(it) {}
};

// Full MCMC cycle: beta, {b_i}, D, delta, {C_i}, V, q, u (with stick
// extension), S, alpha.
class Sampler {
 public:
  Sampler(PanelDataset data, Hyperparams hyper, FitOptions opts);

  void step();
  // Runs from the current iteration up to opts.iters, appending post-burn-in
  // draws to `out`; fills run metadata.
  void run(ChainStore& out);

  const SamplerState& state() const { return state_; }
  SamplerState& mutable_state() { return state_; }
  const PanelDataset& data() const { return data_; }
  const Hyperparams& hyper() const { return hyper_; }
  const FitOptions& options() const { return opts_; }
  long effective_burnin() const { return burnin_; }

  double recompute_panel_loglik() const;

  // cumulative per-block acceptance counters (beta, delta, b, cs)
  struct Counters {
    long beta_prop = 0, beta_acc = 0;
    long delta_prop = 0, delta_acc = 0;
    long b_prop = 0, b_acc = 0;
    long cs_prop = 0, cs_acc = 0;
    long newton_fallbacks = 0;
  };
  const Counters& counters() const { return counters_; }

 private:
  void make_draw(ChainStore& out);
  void flush_window(ChainStore& out, long iter_end);

  PanelDataset data_;
  Hyperparams hyper_;
  FitOptions opts_;
  long burnin_ = 0;
  std::vector<CsRow> forced_;
  SamplerState state_;
  Counters counters_;
  Counters window_base_;
  std::unique_ptr<std::ofstream> cs_log_;
};

}  // namespace csmix
