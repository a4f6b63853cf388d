#include <CLI11.hpp>
#include <json.hpp>

#include "csmix/config.hpp"
#include "csmix/dataset_io.hpp"
#include "csmix/oracle.hpp"
#include "csmix/sampler.hpp"
#include "csmix/simulate.hpp"
#include "csmix/summaries.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace csmix;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

Config load_config(const std::string& path) {
  try {
    return Config::load(path);
  } catch (const std::exception& e) {
    throw CliError(kExitValidation, e.what());
  }
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& config_path, const std::string& out_dir, long seed_override) {
  Config cfg = load_config(config_path);
  if (seed_override >= 0) cfg.set("mcmc.seed", std::to_string(seed_override));
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_i64("mcmc.seed", 0));
  const std::string design = cfg.get_str("simulate.design", "small");
  ensure_dir(out_dir);

  if (design == "small") {
    const int n = static_cast<int>(cfg.get_i64("simulate.n", 100));
    const int T = static_cast<int>(cfg.get_i64("simulate.T", 5));
    const int J = static_cast<int>(cfg.get_i64("simulate.J", 4));
    const double beta_star = cfg.get_f64("simulate.beta_star", 1.0);
    const std::string pmf_text =
        cfg.get_str("simulate.cs_pmf", "1,2:0.3; 1,2,3:0.4; 2,3,4:0.3");
    SubsetPmf pmf;
    try {
      pmf = SubsetPmf::parse(pmf_text, J);
    } catch (const std::exception& e) {
      throw CliError(kExitValidation, std::string("cs_pmf: ") + e.what());
    }
    const Simulated sim = simulate_small(n, T, J, beta_star, pmf, seed);
    write_dataset(sim.data, out_dir + "/dataset.csv");
    write_truth_cs(sim.truth, out_dir + "/truth_cs.csv");
  } else if (design == "large_two_pop") {
    const int n = static_cast<int>(cfg.get_i64("simulate.n", 100));
    const int J = static_cast<int>(cfg.get_i64("simulate.J", 100));
    const int T = static_cast<int>(cfg.get_i64("simulate.T", 20));
    const double beta_star = cfg.get_f64("simulate.beta_star", 1.0);
    const Simulated sim = simulate_large_two_pop(n, J, T, beta_star, seed);
    write_dataset(sim.data, out_dir + "/dataset.csv");
    write_truth_cs(sim.truth, out_dir + "/truth_cs.csv");
  } else if (design == "prior_cs") {
    const int J = static_cast<int>(cfg.get_i64("simulate.J", 4));
    const int K = static_cast<int>(cfg.get_i64("simulate.K", 20));
    const int draws = static_cast<int>(cfg.get_i64("simulate.draws", 10000));
    Hyperparams hyper = hyper_from_config(cfg, J, 1);
    const PriorCsDraws prior = simulate_prior_cs(hyper, J, K, draws, seed);

    auto quantile = [](std::vector<double> v, double p) {
      std::sort(v.begin(), v.end());
      const double pos = p * static_cast<double>(v.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, v.size() - 1);
      const double frac = pos - static_cast<double>(lo);
      return v[lo] * (1 - frac) + v[hi] * frac;
    };

    if (!prior.subset_pmf.empty()) {
      std::ofstream f(out_dir + "/prior_cs_quantiles.csv");
      f << "mask,q05,q50,q95\n";
      const std::size_t total = std::size_t{1} << J;
      std::vector<double> vals(draws);
      for (std::size_t mask = 1; mask < total; ++mask) {
        for (int d = 0; d < draws; ++d) vals[d] = prior.subset_pmf[d][mask];
        f << mask << ',' << fmt(quantile(vals, 0.05)) << ',' << fmt(quantile(vals, 0.5)) << ','
          << fmt(quantile(vals, 0.95)) << '\n';
      }
    }
    {
      std::ofstream f(out_dir + "/prior_item_incl.csv");
      f << "category,q05,q50,q95\n";
      std::vector<double> vals(draws);
      for (int j = 0; j < J; ++j) {
        for (int d = 0; d < draws; ++d) vals[d] = prior.item_incl[d][j];
        f << (j + 1) << ',' << fmt(quantile(vals, 0.05)) << ',' << fmt(quantile(vals, 0.5)) << ','
          << fmt(quantile(vals, 0.95)) << '\n';
      }
    }
    {
      std::ofstream f(out_dir + "/residuals.csv");
      f << "draw,residual\n";
      for (int d = 0; d < draws; ++d) f << (d + 1) << ',' << fmt(prior.residual[d]) << '\n';
    }
  } else {
    throw CliError(kExitValidation, "unknown simulate.design: " + design);
  }
  cfg.save(out_dir + "/config.resolved.ini");
  std::cout << "simulate: wrote " << out_dir << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------- fit

int cmd_fit(const std::string& data_path, const std::string& config_path, const std::string& out_dir,
            long seed_override, long iters_override, long burnin_override, const std::string& variant_override,
            int threads_override, bool resume, const std::string& cs_log) {
  Config cfg = load_config(config_path);
  if (seed_override >= 0) cfg.set("mcmc.seed", std::to_string(seed_override));
  if (iters_override > 0) cfg.set("mcmc.iters", std::to_string(iters_override));
  if (burnin_override >= 0) cfg.set("mcmc.burnin", std::to_string(burnin_override));
  if (!variant_override.empty()) cfg.set("model.variant", variant_override);
  if (threads_override > 0) cfg.set("mcmc.threads", std::to_string(threads_override));
  if (!cs_log.empty()) cfg.set("mcmc.cs_proposal_log", cs_log);

  PanelDataset data;
  try {
    data = read_dataset(data_path);
  } catch (const std::exception& e) {
    throw CliError(kExitValidation, e.what());
  }
  if (cfg.get_bool("model.outside_option", false)) data = augment_outside_option(data);
  const auto violations = validate_dataset(data);
  if (!violations.empty()) {
    std::cerr << "dataset failed validation:\n";
    for (const auto& v : violations) std::cerr << "  " << v.str() << "\n";
    return kExitValidation;
  }

  FitOptions opts;
  Hyperparams hyper;
  try {
    opts = fitoptions_from_config(cfg);
    hyper = hyper_from_config(cfg, data.J, data.d_z);
  } catch (const std::exception& e) {
    throw CliError(kExitValidation, e.what());
  }

  ensure_dir(out_dir);
  ChainStore chain;
  try {
    Sampler sampler(data, hyper, opts);
    if (resume) {
      sampler.mutable_state() = load_sampler_state(out_dir + "/state.json");
      chain = ChainStore::load(out_dir);
      if (sampler.state().iter >= opts.iters)
        throw CliError(kExitValidation, "resume: chain already has the requested iterations");
    }
    const auto t0 = std::chrono::steady_clock::now();
    sampler.run(chain);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();

    chain.save(out_dir);
    save_sampler_state(sampler.state(), out_dir + "/state.json");
    cfg.save(out_dir + "/config.resolved.ini");

    const auto& c = sampler.counters();
    std::cout << "fit: " << chain.num_draws() << " draws in " << secs << " s ("
              << variant_name(opts.variant) << ", seed " << opts.seed << ")\n";
    auto rate = [](long a, long p) { return p ? double(a) / double(p) : 0.0; };
    std::cout << "accept rates: beta " << rate(c.beta_acc, c.beta_prop) << ", delta "
              << rate(c.delta_acc, c.delta_prop) << ", b " << rate(c.b_acc, c.b_prop) << ", cs "
              << rate(c.cs_acc, c.cs_prop) << "\n";
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// --------------------------------------------------------------- summarize

int cmd_summarize(const std::string& chain_dir, const std::string& out_dir) {
  const ChainStore chain = ChainStore::load(chain_dir);
  if (chain.draws.empty()) throw CliError(kExitValidation, "chain has no draws");
  ensure_dir(out_dir);

  const MatrixXd incl = inclusion_probs(chain);
  {
    std::ofstream f(out_dir + "/inclusion_probs.csv");
    f << "subject,category,prob\n";
    for (int i = 0; i < chain.n; ++i)
      for (int j = 0; j < chain.J; ++j) f << (i + 1) << ',' << (j + 1) << ',' << fmt(incl(i, j)) << '\n';
  }
  {
    const auto est = cs_point_estimate(incl, 0.5);
    std::ofstream f(out_dir + "/cs_point.csv");
    f << "subject,category\n";
    for (int i = 0; i < chain.n; ++i)
      for (int j : est[i]) f << (i + 1) << ',' << (j + 1) << '\n';
  }
  {
    const MatrixXd sim = similarity_matrix(chain);
    std::ofstream f(out_dir + "/similarity.csv");
    for (int i = 0; i < chain.n; ++i) {
      for (int k = 0; k < chain.n; ++k) f << (k ? "," : "") << fmt(sim(i, k));
      f << '\n';
    }
  }
  if (chain.has_cs && chain.J <= kEnumGuardJ) {
    const MarginalCsSummary m = marginal_cs_distribution(chain);
    std::ofstream f(out_dir + "/cs_pmf.csv");
    f << "mask,mean,q025,q975\n";
    for (std::size_t mask = 1; mask < m.mean.size(); ++mask)
      f << mask << ',' << fmt(m.mean[mask]) << ',' << fmt(m.q025[mask]) << ',' << fmt(m.q975[mask]) << '\n';
    std::ofstream g(out_dir + "/cs_pmf_deficit.txt");
    g << fmt(m.mean_deficit) << '\n';
  }
  if (chain.has_cs && chain.J > kEnumGuardJ) {
    const MatrixXd co = coinclusion_probs(chain);
    std::ofstream f(out_dir + "/coinclusion.csv");
    for (int j = 0; j < chain.J; ++j) {
      for (int l = 0; l < chain.J; ++l) f << (l ? "," : "") << fmt(co(j, l));
      f << '\n';
    }
  }
  std::cout << "summarize: wrote " << out_dir << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- predict

int cmd_predict(const std::string& chain_dir, const std::string& holdout_path, const std::string& out_dir) {
  const ChainStore chain = ChainStore::load(chain_dir);
  if (chain.draws.empty()) throw CliError(kExitValidation, "chain has no draws");
  PanelDataset holdout;
  try {
    holdout = read_dataset(holdout_path);
  } catch (const std::exception& e) {
    throw CliError(kExitValidation, e.what());
  }
  if (holdout.n > chain.n) throw CliError(kExitValidation, "holdout names subjects unknown to the chain");

  // holdout subject ids are estimation ids; subjects without holdout rows are skipped
  std::vector<int> ids(holdout.n);
  for (int i = 0; i < holdout.n; ++i) ids[i] = i;
  std::vector<double> lp;
  try {
    lp = predictive_loglik(chain, holdout, ids);
  } catch (const std::exception& e) {
    throw CliError(kExitValidation, e.what());
  }

  ensure_dir(out_dir);
  std::ofstream f(out_dir + "/pred_loglik.csv");
  f << "subject,h,logpred\n";
  for (int i = 0; i < holdout.n; ++i) {
    const int h = holdout.subjects[i].T();
    if (h == 0) continue;
    f << (i + 1) << ',' << h << ',' << fmt(lp[i]) << '\n';
  }
  std::cout << "predict: wrote " << out_dir << "/pred_loglik.csv\n";
  return kExitOk;
}

// ------------------------------------------------------------ oracle-check

int cmd_oracle_check(const std::string& out_dir, long seed) {
  const auto reports = run_oracle_checks(static_cast<std::uint64_t>(seed < 0 ? 0 : seed));
  bool all_pass = true;
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) {
    all_pass = all_pass && r.pass;
    j.push_back({{"check", r.name}, {"observed", r.observed}, {"threshold", r.threshold}, {"pass", r.pass}});
    std::cout << (r.pass ? "[pass] " : "[FAIL] ") << r.name << " observed " << r.observed << " (threshold "
              << r.threshold << ")\n";
  }
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    std::ofstream f(out_dir + "/oracle_check.json");
    f << j.dump(2) << '\n';
  }
  return all_pass ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csmix: multinomial logit with Dirichlet-process consideration-set heterogeneity"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", data_path, chain_dir, holdout_path, variant, cs_log;
  long seed = -1, iters = -1, burnin = -1;
  int threads = -1;
  bool resume = false;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset or prior draws");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "override mcmc.seed");

  auto* fit = app.add_subcommand("fit", "run the MCMC sampler");
  fit->add_option("--data", data_path, "dataset csv (with .meta.json sidecar)")->required();
  fit->add_option("--config", config_path, "config file")->required();
  fit->add_option("--out", out_dir, "output directory");
  fit->add_option("--seed", seed, "override mcmc.seed");
  fit->add_option("--iters", iters, "override mcmc.iters");
  fit->add_option("--burnin", burnin, "override mcmc.burnin");
  fit->add_option("--variant", variant, "mnl|mnl_r|mnl_c|mnl_rc");
  fit->add_option("--threads", threads, "worker threads for per-subject blocks");
  fit->add_option("--cs-log", cs_log, "debug CSV of consideration-set proposals");
  fit->add_flag("--resume", resume, "continue from state.json in the output directory");

  auto* summ = app.add_subcommand("summarize", "posterior summaries from a stored chain");
  summ->add_option("--chain", chain_dir, "chain directory")->required();
  summ->add_option("--out", out_dir, "output directory");

  auto* pred = app.add_subcommand("predict", "predictive likelihood on holdout responses");
  pred->add_option("--chain", chain_dir, "chain directory")->required();
  pred->add_option("--holdout", holdout_path, "holdout dataset csv")->required();
  pred->add_option("--out", out_dir, "output directory");

  auto* orc = app.add_subcommand("oracle-check", "sampler-vs-enumeration equivalence checks");
  orc->add_option("--out", out_dir, "output directory for oracle_check.json");
  orc->add_option("--seed", seed, "fixture seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir, seed);
    if (fit->parsed())
      return cmd_fit(data_path, config_path, out_dir, seed, iters, burnin, variant, threads, resume, cs_log);
    if (summ->parsed()) return cmd_summarize(chain_dir, out_dir);
    if (pred->parsed()) return cmd_predict(chain_dir, holdout_path, out_dir);
    if (orc->parsed()) return cmd_oracle_check(out_dir, seed);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
