#include "csmix/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace csmix {

namespace {
std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config " + path);
  Config cfg;
  std::string line, section;
  long lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error("config: unterminated section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config: expected key=value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
    cfg.kv[section.empty() ? key : section + "." + key] = val;
  }
  return cfg;
}

void Config::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write config " + path);
  std::string section;
  for (const auto& [key, val] : kv) {  // std::map keeps sections contiguous
    const auto dot = key.find('.');
    const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (sec != section) {
      section = sec;
      f << '[' << section << "]\n";
    }
    f << name << " = " << val << '\n';
  }
}

std::string Config::get_str(const std::string& key, const std::string& dflt) const {
  const auto it = kv.find(key);
  return it == kv.end() ? dflt : it->second;
}

double Config::get_f64(const std::string& key, double dflt) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  std::size_t pos = 0;
  const double v = std::stod(it->second, &pos);
  if (pos != it->second.size()) throw std::runtime_error("config: bad number for " + key);
  return v;
}

long Config::get_i64(const std::string& key, long dflt) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  std::size_t pos = 0;
  const long v = std::stol(it->second, &pos);
  if (pos != it->second.size()) throw std::runtime_error("config: bad integer for " + key);
  return v;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("config: bad boolean for " + key);
}

Hyperparams hyper_from_config(const Config& cfg, int J, int d_z) {
  Hyperparams h = Hyperparams::defaults(J, std::max(d_z, 1));
  h.a_alpha = cfg.get_f64("prior.a_alpha", h.a_alpha);
  h.b_alpha = cfg.get_f64("prior.b_alpha", h.b_alpha);
  const double s = cfg.get_f64("prior.q_s", 1.0);
  const double r0 = cfg.get_f64("prior.q_r0", 1.0);
  h.set_q_sparsity(J, s, r0);
  if (cfg.has("prior.a_q") && cfg.has("prior.b_q")) {
    h.a_q.assign(J, cfg.get_f64("prior.a_q", 1.0));
    h.b_q.assign(J, cfg.get_f64("prior.b_q", 1.0));
  }
  h.v_beta = cfg.get_f64("prior.v_beta", h.v_beta);
  h.v_delta = cfg.get_f64("prior.v_delta", h.v_delta);
  const int dz = std::max(d_z, 1);
  h.wishart_v = cfg.get_f64("prior.wishart_v", dz + 6.0);
  h.wishart_R = MatrixXd::Identity(dz, dz) * cfg.get_f64("prior.wishart_r_scale", 1.0 / h.wishart_v);
  h.proposal_scale = cfg.get_f64("mcmc.proposal_scale", 1.0);
  h.newton_max_iter = static_cast<int>(cfg.get_i64("mcmc.newton_max_iter", 50));
  h.newton_tol = cfg.get_f64("mcmc.newton_tol", 1e-8);
  return h;
}

FitOptions fitoptions_from_config(const Config& cfg) {
  FitOptions o;
  o.iters = cfg.get_i64("mcmc.iters", 1000);
  o.burnin = cfg.get_i64("mcmc.burnin", -1);
  o.thin = static_cast<int>(cfg.get_i64("mcmc.thin", 1));
  o.seed = static_cast<std::uint64_t>(cfg.get_i64("mcmc.seed", 0));
  o.threads = static_cast<int>(cfg.get_i64("mcmc.threads", 1));
  o.init_clusters = static_cast<int>(cfg.get_i64("mcmc.init_clusters", 0));
  o.debug_checks = cfg.get_bool("mcmc.debug_checks", false);
  o.cs_proposal_log = cfg.get_str("mcmc.cs_proposal_log", "");
  o.accept_window = cfg.get_i64("mcmc.accept_window", 1000);
  o.variant = parse_variant(cfg.get_str("model.variant", "mnl_rc"));
  return o;
}

}  // namespace csmix
