#include <doctest.h>

#include "csmix/logit.hpp"
#include "csmix/param_sampler.hpp"
#include "csmix/sampler.hpp"
#include "csmix/simulate.hpp"

#include <cmath>

using namespace csmix;

namespace {

Simulated study_data(int n, int T, std::uint64_t seed) {
  const SubsetPmf pmf = SubsetPmf::parse("1,2:0.3; 1,2,3:0.4; 2,3,4:0.3", 4);
  return simulate_small(n, T, 4, 1.0, pmf, seed);
}

ChainStore fit(const Simulated& sim, Variant v, long iters, long burnin, std::uint64_t seed) {
  FitOptions opts;
  opts.iters = iters;
  opts.burnin = burnin;
  opts.seed = seed;
  opts.variant = v;
  Sampler s(sim.data, Hyperparams::defaults(sim.data.J, sim.data.d_z), opts);
  ChainStore ch;
  s.run(ch);
  return ch;
}

double beta_mean(const ChainStore& ch) {
  double s = 0.0;
  for (const auto& d : ch.draws) s += d.beta[0];
  return s / ch.num_draws();
}

}  // namespace

TEST_CASE("variant parsing round trips and gates the blocks") {
  for (const char* name : {"mnl", "mnl_r", "mnl_c", "mnl_rc"})
    CHECK(variant_name(parse_variant(name)) == name);
  CHECK_THROWS(parse_variant("probit"));
  CHECK(variant_has_re(Variant::mnl_r));
  CHECK(!variant_has_cs(Variant::mnl_r));
  CHECK(variant_has_cs(Variant::mnl_c));
  CHECK(!variant_has_re(Variant::mnl_c));
}

TEST_CASE("plain MNL keeps the full set and no random effects, and still recovers beta") {
  const Simulated sim = study_data(80, 8, 21);
  const ChainStore plain = fit(sim, Variant::mnl, 450, 150, 21);
  const CsRow full(4, 1);
  for (const auto& d : plain.draws) {
    REQUIRE(d.b.empty());
    REQUIRE(d.D.size() == 0);
    for (const auto& row : d.C) REQUIRE(row == full);
  }
  // the full model on the same data sits closer to the generating value;
  // forcing the full set biases beta on heterogeneous-set data
  const ChainStore rc = fit(sim, Variant::mnl_rc, 450, 150, 21);
  const double m_plain = beta_mean(plain);
  const double m_rc = beta_mean(rc);
  CHECK(m_plain > 0.2);
  CHECK(std::abs(m_rc - 1.0) < std::abs(m_plain - 1.0));
  CHECK(m_rc > 0.6);
  CHECK(m_rc < 1.5);
}

TEST_CASE("mnl_c carries no random effects; mnl_r keeps the full set") {
  const Simulated sim = study_data(30, 4, 23);
  const ChainStore c = fit(sim, Variant::mnl_c, 120, 40, 23);
  for (const auto& d : c.draws) REQUIRE(d.b.empty());
  const ChainStore r = fit(sim, Variant::mnl_r, 120, 40, 23);
  const CsRow full(4, 1);
  for (const auto& d : r.draws) {
    REQUIRE(!d.b.empty());
    for (const auto& row : d.C) REQUIRE(row == full);
  }
}

TEST_CASE("running log-likelihood matches a from-scratch recomputation across cycles") {
  const Simulated sim = study_data(40, 5, 29);
  FitOptions opts;
  opts.iters = 80;
  opts.burnin = 20;
  opts.seed = 29;
  Sampler s(sim.data, Hyperparams::defaults(4, 1), opts);
  for (int g = 0; g < 80; ++g) {
    s.step();
    REQUIRE(std::abs(s.state().panel_ll - s.recompute_panel_loglik()) < 1e-8);
  }
}

TEST_CASE("NaN likelihood aborts with the failing iteration") {
  Simulated sim = study_data(10, 3, 31);
  sim.data.subjects[2].x[1] = std::numeric_limits<double>::infinity();
  sim.data.subjects[2].z = sim.data.subjects[2].x;
  FitOptions opts;
  opts.iters = 50;
  opts.burnin = 10;
  opts.seed = 31;
  Sampler s(sim.data, Hyperparams::defaults(4, 1), opts);
  ChainStore ch;
  try {
    s.run(ch);
    FAIL("expected NumericalAbort");
  } catch (const NumericalAbort& e) {
    CHECK(e.iter >= 1);
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("exhausted Newton budget falls back to a random walk and keeps sampling") {
  const Simulated sim = study_data(30, 4, 37);
  Hyperparams h = Hyperparams::defaults(4, 1);
  h.newton_max_iter = 1;
  h.newton_tol = 0.0;  // unreachable: every tailoring attempt fails
  ResponseParams p = ResponseParams::zeros(30, 4, 1, 1);
  const auto C = ConsiderationState::full(30, 4);
  Rng rng(37);
  BlockResult rb, rd;
  for (int sweep = 0; sweep < 20; ++sweep) {
    const BlockResult b = sample_beta(p, C, sim.data, h, rng);
    rb.proposals += b.proposals;
    rb.accepted += b.accepted;
    rb.fallbacks += b.fallbacks;
    const BlockResult d = sample_delta(p, C, sim.data, h, rng);
    rd.proposals += d.proposals;
    rd.fallbacks += d.fallbacks;
  }
  CHECK(rb.fallbacks == rb.proposals);
  CHECK(rd.fallbacks == rd.proposals);
  CHECK(rb.accepted > 0);  // the random walk still moves
  for (int k = 0; k < 4; ++k) CHECK(std::isfinite(p.delta[k]));
}

TEST_CASE("burn-in defaults to a fifth of the requested iterations") {
  const Simulated sim = study_data(10, 3, 41);
  FitOptions opts;
  opts.iters = 100;
  opts.seed = 41;
  Sampler s(sim.data, Hyperparams::defaults(4, 1), opts);
  CHECK(s.effective_burnin() == 20);
  ChainStore ch;
  s.run(ch);
  CHECK(ch.num_draws() == 80);
  CHECK_THROWS(Sampler(sim.data, Hyperparams::defaults(4, 1), [] {
                 FitOptions o;
                 o.iters = 10;
                 o.burnin = 10;
                 return o;
               }()));
}
