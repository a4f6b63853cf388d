#pragma once

#include "csmix/sampler.hpp"
#include "csmix/types.hpp"

#include <map>
#include <string>

namespace csmix {

// Flat INI-style config: [section] headers, key = value lines, '#' comments.
// Keys are stored as "section.key".
struct Config {
  std::map<std::string, std::string> kv;

  static Config load(const std::string& path);
  void save(const std::string& path) const;

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { kv[key] = value; }

  std::string get_str(const std::string& key, const std::string& dflt) const;
  double get_f64(const std::string& key, double dflt) const;
  long get_i64(const std::string& key, long dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
};

// Hyperparameters from the [prior] section, defaults matching the small-J
// study: alpha ~ Gamma(2,4), N(0,3) priors for beta and delta, the (s, r0)
// sparsity parameterization for q, Wishart (d_z+6, I/(d_z+6)).
Hyperparams hyper_from_config(const Config& cfg, int J, int d_z);

// Fit options from [mcmc] and [model].
FitOptions fitoptions_from_config(const Config& cfg);

}  // namespace csmix
