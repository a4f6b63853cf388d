#include "csmix/sampler.hpp"

#include "csmix/dp_sampler.hpp"
#include "csmix/logit.hpp"
#include "csmix/parallel.hpp"
#include "csmix/param_sampler.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>

namespace csmix {

bool variant_has_re(Variant v) { return v == Variant::mnl_r || v == Variant::mnl_rc; }
bool variant_has_cs(Variant v) { return v == Variant::mnl_c || v == Variant::mnl_rc; }

Variant parse_variant(const std::string& name) {
  if (name == "mnl") return Variant::mnl;
  if (name == "mnl_r") return Variant::mnl_r;
  if (name == "mnl_c") return Variant::mnl_c;
  if (name == "mnl_rc") return Variant::mnl_rc;
  throw std::invalid_argument("unknown variant: " + name);
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::mnl: return "mnl";
    case Variant::mnl_r: return "mnl_r";
    case Variant::mnl_c: return "mnl_c";
    case Variant::mnl_rc: return "mnl_rc";
  }
  return "mnl_rc";
}

namespace {

// Initial partition of subjects from their observed-response sets: a greedy
// leader pass joining cluster h when the co-occurrence lift
// |a n b| * J / (|a| |b|) clears 1.2. Lift is scale-free in J, so the same
// rule groups overlapping small-J sets and separates large-J subpopulations.
// The rest of the J=100 regime depends on this start: single-coordinate
// assignment moves cannot merge or found clusters across the sharp
// Bernoulli-product likelihood ratios there.
std::vector<int> initial_partition(const std::vector<CsRow>& forced, int J, int cap) {
  const int n = static_cast<int>(forced.size());
  std::vector<int> S(n, 0);
  std::vector<int> leader;  // founding subject per cluster
  for (int i = 0; i < n; ++i) {
    const CsRow& a = forced[i];
    const int asz = std::max(1, cs_size(a));
    int best = -1;
    for (int h = 0; h < static_cast<int>(leader.size()); ++h) {
      const CsRow& b = forced[leader[h]];
      int inter = 0;
      for (int j = 0; j < J; ++j) inter += (a[j] && b[j]);
      if (inter == 0) continue;
      const double lift =
          static_cast<double>(inter) * J / (static_cast<double>(asz) * std::max(1, cs_size(b)));
      if (lift >= 1.2) {
        best = h;
        break;
      }
    }
    if (best < 0) {
      if (static_cast<int>(leader.size()) < cap) {
        leader.push_back(i);
        best = static_cast<int>(leader.size()) - 1;
      } else {
        best = 0;
      }
    }
    S[i] = best;
  }
  return S;
}

}  // namespace

Sampler::Sampler(PanelDataset data, Hyperparams hyper, FitOptions opts)
    : data_(std::move(data)), hyper_(std::move(hyper)), opts_(opts) {
  hyper_.validate(variant_has_re(opts_.variant) ? data_.d_z : 0);
  burnin_ = opts_.burnin >= 0 ? opts_.burnin : opts_.iters / 5;
  if (burnin_ >= opts_.iters) throw std::invalid_argument("burnin must be smaller than iters");
  forced_ = forced_mask(data_);

  const int n = data_.n, J = data_.J;
  state_.params = ResponseParams::zeros(n, J, data_.d_x, data_.d_z);
  state_.C = ConsiderationState::full(n, J);

  auto& mix = state_.mix;
  mix.alpha = hyper_.a_alpha / hyper_.b_alpha;
  const int cap = opts_.init_clusters > 0 ? std::min(opts_.init_clusters, n) : std::min(n, 50);
  mix.S = initial_partition(forced_, J, cap);
  int kinit = 0;
  for (int s : mix.S) kinit = std::max(kinit, s + 1);
  mix.kstar = kinit;
  mix.V.assign(kinit, 0.3);
  // attention rows seeded from each cluster's observed inclusion profile
  mix.Q.assign(kinit, std::vector<double>(J, 0.0));
  std::vector<int> nh(kinit, 0);
  for (int i = 0; i < n; ++i) {
    ++nh[mix.S[i]];
    for (int j = 0; j < J; ++j) mix.Q[mix.S[i]][j] += forced_[i][j];
  }
  for (int h = 0; h < kinit; ++h)
    for (int j = 0; j < J; ++j)
      mix.Q[h][j] = std::clamp((mix.Q[h][j] + 0.5) / (nh[h] + 1.0), 0.02, 0.98);
  mix.recompute_weights();
  mix.u.resize(n);
  for (int i = 0; i < n; ++i) mix.u[i] = 0.5 * mix.omega[mix.S[i]];

  state_.panel_ll = panel_loglik(state_.params, data_, state_.C);

  if (!opts_.cs_proposal_log.empty()) {
    cs_log_ = std::make_unique<std::ofstream>(opts_.cs_proposal_log);
    *cs_log_ << "iter,subject,coord,from,to,accept_prob,accepted\n";
  }
}

double Sampler::recompute_panel_loglik() const { return panel_loglik(state_.params, data_, state_.C); }

void Sampler::step() {
  const std::uint64_t g = static_cast<std::uint64_t>(++state_.iter);
  const std::uint64_t seed = opts_.seed;
  auto& params = state_.params;
  auto& C = state_.C;
  auto& mix = state_.mix;
  const int n = data_.n, J = data_.J;

  if (data_.d_x > 0) {
    Rng rng = Rng::derive(seed, {g, stream::kBeta});
    const BlockResult r = sample_beta(params, C, data_, hyper_, rng);
    counters_.beta_prop += r.proposals;
    counters_.beta_acc += r.accepted;
    counters_.newton_fallbacks += r.fallbacks;
    state_.panel_ll += r.delta_loglik;
  }

  if (variant_has_re(opts_.variant) && data_.d_z > 0) {
    const BlockResult r = sample_b(params, C, data_, hyper_, seed, g, opts_.threads);
    counters_.b_prop += r.proposals;
    counters_.b_acc += r.accepted;
    state_.panel_ll += r.delta_loglik;

    Rng rng = Rng::derive(seed, {g, stream::kCovariance});
    sample_D(params, hyper_, rng);
  }

  if (J > 1) {
    Rng rng = Rng::derive(seed, {g, stream::kDelta});
    const BlockResult r = sample_delta(params, C, data_, hyper_, rng);
    counters_.delta_prop += r.proposals;
    counters_.delta_acc += r.accepted;
    counters_.newton_fallbacks += r.fallbacks;
    state_.panel_ll += r.delta_loglik;
  }

  if (variant_has_cs(opts_.variant)) {
    std::vector<CsSweepResult> results(n);
    std::vector<std::vector<CsProposal>> logs(cs_log_ ? n : 0);
    parallel_for(n, opts_.threads, [&](int i) {
      Rng rng = Rng::derive(seed, {g, stream::kConsideration, static_cast<std::uint64_t>(i)});
      results[i] = mh_update_cs(i, C.rows[i], params, mix.Q[mix.S[i]], data_, forced_[i], rng,
                                cs_log_ ? &logs[i] : nullptr);
    });
    for (int i = 0; i < n; ++i) {
      counters_.cs_prop += results[i].proposals;
      counters_.cs_acc += results[i].accepted;
      state_.panel_ll += results[i].delta_loglik;
    }
    if (cs_log_) {
      char buf[32];
      for (const auto& lg : logs)
        for (const auto& p : lg) {
          std::snprintf(buf, sizeof(buf), "%.17g", p.accept_prob);
          *cs_log_ << state_.iter << ',' << p.subject + 1 << ',' << p.coord + 1 << ',' << int(p.from) << ','
                   << int(p.to) << ',' << buf << ',' << (p.accepted ? 1 : 0) << '\n';
        }
    }

    // DP block in the listed order: V, q, u (with stick extension), S, alpha
    const ClusterStats stats = ClusterStats::compute(C, mix.S, mix.kstar, J);
    {
      Rng rng = Rng::derive(seed, {g, stream::kSticks});
      sample_sticks(mix, stats, rng);
    }
    {
      Rng rng = Rng::derive(seed, {g, stream::kAttention});
      sample_q(mix, stats, hyper_, rng);
    }
    {
      Rng rng = Rng::derive(seed, {g, stream::kSlices});
      sample_slices(mix, rng);
    }
    {
      Rng rng = Rng::derive(seed, {g, stream::kExtend});
      extend_sticks(mix, hyper_, rng);
    }
    {
      Rng rng = Rng::derive(seed, {g, stream::kAssign});
      sample_assignments(mix, C, rng);
    }
    {
      Rng rng = Rng::derive(seed, {g, stream::kAlpha});
      mix.alpha = sample_alpha(count_occupied(mix.S, mix.kstar), n, mix.alpha, hyper_, rng);
    }
  }

  if (std::isnan(state_.panel_ll)) throw NumericalAbort(state_.iter);
  if (opts_.debug_checks && state_.iter % 100 == 0) {
    const double full = recompute_panel_loglik();
    if (std::abs(full - state_.panel_ll) > 1e-8)
      std::cerr << "[csmix] warning: incremental log-likelihood drift " << std::abs(full - state_.panel_ll)
                << " at iteration " << state_.iter << "\n";
  }
}

void Sampler::make_draw(ChainStore& out) {
  ChainDraw d;
  d.iter = state_.iter;
  d.beta = state_.params.beta;
  d.delta = state_.params.delta;
  if (variant_has_re(opts_.variant)) {
    d.b = state_.params.b;
    d.D = state_.params.D;
  }
  d.C = state_.C.rows;
  d.S = state_.mix.S;
  d.alpha = state_.mix.alpha;
  d.kstar = state_.mix.kstar;
  d.omega = state_.mix.omega;
  d.Q = state_.mix.Q;
  out.draws.push_back(std::move(d));
}

void Sampler::flush_window(ChainStore& out, long iter_end) {
  auto push = [&](const char* block, long prop, long acc) {
    if (prop > 0) out.accept_windows.push_back({iter_end, block, prop, acc});
  };
  push("beta", counters_.beta_prop - window_base_.beta_prop, counters_.beta_acc - window_base_.beta_acc);
  push("delta", counters_.delta_prop - window_base_.delta_prop, counters_.delta_acc - window_base_.delta_acc);
  push("b", counters_.b_prop - window_base_.b_prop, counters_.b_acc - window_base_.b_acc);
  push("cs", counters_.cs_prop - window_base_.cs_prop, counters_.cs_acc - window_base_.cs_acc);
  window_base_ = counters_;
}

void Sampler::run(ChainStore& out) {
  out.seed = opts_.seed;
  out.iters = opts_.iters;
  out.burnin = burnin_;
  out.thin = opts_.thin;
  out.variant = variant_name(opts_.variant);
  out.n = data_.n;
  out.J = data_.J;
  out.d_x = data_.d_x;
  out.d_z = data_.d_z;
  out.has_re = variant_has_re(opts_.variant);
  out.has_cs = variant_has_cs(opts_.variant);

  long last_window = state_.iter;
  while (state_.iter < opts_.iters) {
    step();
    if (state_.iter > burnin_ && (state_.iter - burnin_) % opts_.thin == 0) make_draw(out);
    if (state_.iter - last_window >= opts_.accept_window) {
      flush_window(out, state_.iter);
      last_window = state_.iter;
    }
  }
  if (state_.iter != last_window) flush_window(out, state_.iter);
  if (cs_log_) cs_log_->flush();
}

}  // namespace csmix
