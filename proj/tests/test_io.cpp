#include <doctest.h>

#include "csmix/config.hpp"
#include "csmix/dataset_io.hpp"
#include "csmix/sampler.hpp"
#include "csmix/simulate.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace csmix;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("csmix_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("dataset csv round trip preserves everything") {
  const SubsetPmf pmf = SubsetPmf::parse("1,2:0.5; 2,3:0.5", 3);
  Simulated sim = simulate_small(12, 4, 3, 1.0, pmf, 31);
  // unbalance the panel
  sim.data.subjects[2].y.resize(2);
  sim.data.subjects[2].x.resize(2 * 3);
  sim.data.subjects[2].z.resize(2 * 3);
  TempDir tmp;
  const std::string csv = tmp / "d.csv";
  write_dataset(sim.data, csv);
  const PanelDataset back = read_dataset(csv);
  CHECK(back.n == sim.data.n);
  CHECK(back.J == sim.data.J);
  CHECK(back.d_x == 1);
  CHECK(back.d_z == 1);
  for (int i = 0; i < back.n; ++i) {
    REQUIRE(back.subjects[i].y == sim.data.subjects[i].y);
    REQUIRE(back.subjects[i].x == sim.data.subjects[i].x);  // %.17g round-trips exactly
    REQUIRE(back.subjects[i].z == sim.data.subjects[i].z);
  }
  CHECK(validate_dataset(back).empty());
}

TEST_CASE("truth round trip") {
  const SubsetPmf pmf = SubsetPmf::parse("1,2:0.5; 2,3:0.5", 3);
  const Simulated sim = simulate_small(9, 2, 3, 1.0, pmf, 37);
  TempDir tmp;
  write_truth_cs(sim.truth, tmp / "t.csv");
  const ConsiderationState back = read_truth_cs(tmp / "t.csv", 9, 3);
  CHECK(back.rows == sim.truth.rows);
}

TEST_CASE("a malformed dataset is reported by validation, not by the loader") {
  TempDir tmp;
  const std::string csv = tmp / "bad.csv";
  {
    std::ofstream f(csv);
    f << "subject,occasion,choice,x1,z1,alternative\n";
    f << "1,1,9,0.5,0.5,1\n";   // choice out of range
    f << "1,1,9,1.5,1.5,2\n";
  }
  {
    std::ofstream f(meta_path_for(csv));
    f << R"({"n":1,"J":2,"d_x":1,"d_z":1,"outside_option":false})";
  }
  const PanelDataset d = read_dataset(csv);
  const auto v = validate_dataset(d);
  REQUIRE(!v.empty());
  CHECK(v[0].what == "response out of range");
}

TEST_CASE("config parse, defaults, overrides and echo") {
  TempDir tmp;
  const std::string path = tmp / "c.ini";
  {
    std::ofstream f(path);
    f << "# comment\n[prior]\na_alpha = 2.5\nq_s = 5\nq_r0 = 30\n\n[mcmc]\niters= 400\nseed =9\n"
      << "[model]\nvariant = mnl_c\n";
  }
  const Config cfg = Config::load(path);
  CHECK(cfg.get_f64("prior.a_alpha", 0) == 2.5);
  CHECK(cfg.get_i64("mcmc.iters", 0) == 400);
  CHECK(cfg.get_str("model.variant", "") == "mnl_c");
  CHECK(cfg.get_f64("prior.b_alpha", 4.0) == 4.0);  // default fills the gap

  const Hyperparams h = hyper_from_config(cfg, 100, 3);
  CHECK(h.a_alpha == 2.5);
  CHECK(h.a_q[0] == doctest::Approx(5.0 * 30.0 / 100.0));
  CHECK(h.wishart_v == doctest::Approx(9.0));
  CHECK(h.wishart_R(0, 0) == doctest::Approx(1.0 / 9.0));

  const FitOptions o = fitoptions_from_config(cfg);
  CHECK(o.iters == 400);
  CHECK(o.seed == 9);
  CHECK(o.variant == Variant::mnl_c);

  const std::string echo = tmp / "echo.ini";
  Config copy = cfg;
  copy.save(echo);
  const Config back = Config::load(echo);
  CHECK(back.kv == cfg.kv);
}

TEST_CASE("chain store round trip") {
  const SubsetPmf pmf = SubsetPmf::parse("1,2:0.5; 2,3:0.5", 3);
  const Simulated sim = simulate_small(8, 3, 3, 1.0, pmf, 41);
  FitOptions opts;
  opts.iters = 60;
  opts.burnin = 20;
  opts.seed = 11;
  Sampler s(sim.data, Hyperparams::defaults(3, 1), opts);
  ChainStore ch;
  s.run(ch);
  REQUIRE(ch.num_draws() == 40);

  TempDir tmp;
  ch.save(tmp / "chain");
  const ChainStore back = ChainStore::load(tmp / "chain");
  CHECK(back.num_draws() == ch.num_draws());
  CHECK(back.variant == ch.variant);
  CHECK(back.seed == ch.seed);
  for (int g = 0; g < ch.num_draws(); ++g) {
    const auto& a = ch.draws[g];
    const auto& b = back.draws[g];
    REQUIRE(a.iter == b.iter);
    REQUIRE(a.beta == b.beta);
    REQUIRE(a.delta == b.delta);
    REQUIRE(a.C == b.C);
    REQUIRE(a.S == b.S);
    REQUIRE(a.alpha == b.alpha);
    REQUIRE(a.kstar == b.kstar);
    REQUIRE(a.omega == b.omega);
    REQUIRE(a.Q == b.Q);
    for (int i = 0; i < 8; ++i) REQUIRE(a.b[i] == b.b[i]);
    REQUIRE(a.D == b.D);
  }
  CHECK(back.accept_windows.size() == ch.accept_windows.size());
}

TEST_CASE("sampler state survives a JSON round trip and resume matches") {
  const SubsetPmf pmf = SubsetPmf::parse("1,2:0.5; 2,3:0.5", 3);
  const Simulated sim = simulate_small(10, 3, 3, 1.0, pmf, 43);
  const Hyperparams hyper = Hyperparams::defaults(3, 1);
  FitOptions opts;
  opts.iters = 80;
  opts.burnin = 20;
  opts.seed = 13;

  // reference: one uninterrupted run
  Sampler ref(sim.data, hyper, opts);
  ChainStore ref_chain;
  ref.run(ref_chain);

  // interrupted at 50, serialized, resumed
  FitOptions first = opts;
  first.iters = 50;
  first.burnin = 20;
  Sampler a(sim.data, hyper, first);
  ChainStore chain;
  a.run(chain);
  TempDir tmp;
  save_sampler_state(a.state(), tmp / "state.json");

  Sampler b(sim.data, hyper, opts);
  b.mutable_state() = load_sampler_state(tmp / "state.json");
  b.run(chain);

  REQUIRE(chain.num_draws() == ref_chain.num_draws());
  for (int g = 0; g < chain.num_draws(); ++g) {
    REQUIRE(chain.draws[g].iter == ref_chain.draws[g].iter);
    REQUIRE(chain.draws[g].beta == ref_chain.draws[g].beta);
    REQUIRE(chain.draws[g].delta == ref_chain.draws[g].delta);
    REQUIRE(chain.draws[g].C == ref_chain.draws[g].C);
    REQUIRE(chain.draws[g].S == ref_chain.draws[g].S);
    REQUIRE(chain.draws[g].alpha == ref_chain.draws[g].alpha);
  }
  // the final states coincide exactly
  CHECK(b.state().panel_ll == ref.state().panel_ll);
  CHECK(b.state().params.beta == ref.state().params.beta);
  CHECK(b.state().mix.S == ref.state().mix.S);
}

TEST_CASE("threaded and sequential consideration sweeps coincide") {
  const SubsetPmf pmf = SubsetPmf::parse("1,2:0.4; 1,2,3:0.6", 3);
  const Simulated sim = simulate_small(16, 4, 3, 1.0, pmf, 47);
  const Hyperparams hyper = Hyperparams::defaults(3, 1);
  FitOptions seq;
  seq.iters = 40;
  seq.burnin = 10;
  seq.seed = 17;
  FitOptions par = seq;
  par.threads = 4;
  Sampler sa(sim.data, hyper, seq);
  Sampler sb(sim.data, hyper, par);
  ChainStore ca, cb;
  sa.run(ca);
  sb.run(cb);
  REQUIRE(ca.num_draws() == cb.num_draws());
  for (int g = 0; g < ca.num_draws(); ++g) {
    REQUIRE(ca.draws[g].C == cb.draws[g].C);
    REQUIRE(ca.draws[g].beta == cb.draws[g].beta);
    REQUIRE(ca.draws[g].S == cb.draws[g].S);
  }
}

TEST_CASE("record count equals the requested post-burn-in draws and invariants hold") {
  const SubsetPmf pmf = SubsetPmf::parse("1,2:0.5; 2,3:0.5", 3);
  const Simulated sim = simulate_small(10, 3, 3, 1.0, pmf, 53);
  FitOptions opts;
  opts.iters = 90;
  opts.burnin = 30;
  opts.thin = 2;
  opts.seed = 19;
  Sampler s(sim.data, Hyperparams::defaults(3, 1), opts);
  ChainStore ch;
  s.run(ch);
  CHECK(ch.num_draws() == 30);  // (90 - 30) / 2
  const auto forced = forced_mask(sim.data);
  for (const auto& d : ch.draws) {
    REQUIRE(d.delta[2] == 0.0);
    REQUIRE(d.kstar >= 1);
    double wsum = 0.0;
    for (double w : d.omega) wsum += w;
    REQUIRE(wsum <= 1.0 + 1e-12);
    for (int i = 0; i < 10; ++i) {
      REQUIRE(satisfies_forced(d.C[i], forced[i]));
      REQUIRE(d.S[i] >= 0);
      REQUIRE(d.S[i] < d.kstar);
    }
  }
}
