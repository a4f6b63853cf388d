#pragma once

#include "csmix/types.hpp"

#include <string>
#include <vector>

namespace csmix {

// One stored post-burn-in draw. b/D are empty for variants without random
// effects; the mixture fields are trivial for variants without
// consideration-set heterogeneity.
struct ChainDraw {
  long iter = 0;
  VectorXd beta;
  VectorXd delta;
  std::vector<VectorXd> b;
  MatrixXd D;
  std::vector<CsRow> C;
  std::vector<int> S;
  double alpha = 0.0;
  int kstar = 0;
  std::vector<double> omega;
  std::vector<std::vector<double>> Q;
};

struct AcceptWindow {
  long iter_end = 0;
  std::string block;
  long proposals = 0;
  long accepted = 0;
};

struct ChainStore {
  std::uint64_t seed = 0;
  long iters = 0;
  long burnin = 0;
  int thin = 1;
  std::string variant;
  int n = 0, J = 0, d_x = 0, d_z = 0;
  bool has_re = false, has_cs = false;

  std::vector<ChainDraw> draws;
  std::vector<AcceptWindow> accept_windows;

  int num_draws() const { return static_cast<int>(draws.size()); }

  void save(const std::string& dir) const;
  static ChainStore load(const std::string& dir);
};

}  // namespace csmix
