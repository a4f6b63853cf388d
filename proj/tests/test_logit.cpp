#include <doctest.h>

#include "csmix/logit.hpp"
#include "csmix/rng.hpp"

#include <cmath>

using namespace csmix;

namespace {

PanelDataset random_panel(int n, int J, int d_x, int d_z, std::vector<std::vector<int>> responses,
                          std::uint64_t seed) {
  PanelDataset d;
  d.n = n;
  d.J = J;
  d.d_x = d_x;
  d.d_z = d_z;
  d.subjects.resize(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    auto& s = d.subjects[i];
    s.y = responses[i];
    const int T = s.T();
    s.x.resize(static_cast<std::size_t>(T) * J * d_x);
    s.z.resize(static_cast<std::size_t>(T) * J * d_z);
    for (auto& v : s.x) v = rng.normal();
    for (auto& v : s.z) v = rng.normal();
  }
  return d;
}

ResponseParams random_params(int n, int J, int d_x, int d_z, std::uint64_t seed) {
  ResponseParams p = ResponseParams::zeros(n, J, d_x, d_z);
  Rng rng(seed);
  for (int j = 0; j < J - 1; ++j) p.delta[j] = rng.normal();
  for (int k = 0; k < d_x; ++k) p.beta[k] = rng.normal();
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d_z; ++k) p.b[i][k] = rng.normal();
  return p;
}

}  // namespace

TEST_CASE("utilities vanish when all parameters are zero") {
  const auto d = random_panel(1, 4, 2, 1, {{0}}, 3);
  const auto p = ResponseParams::zeros(1, 4, 2, 1);
  CHECK(utilities(p, d, 0, 0).norm() == 0.0);
}

TEST_CASE("utilities: two-category arithmetic") {
  PanelDataset d;
  d.n = 1;
  d.J = 2;
  d.d_x = 1;
  d.d_z = 1;
  d.subjects.resize(1);
  d.subjects[0].y = {0};
  d.subjects[0].x = {0.5, -0.5};
  d.subjects[0].z = {0.0, 0.0};
  ResponseParams p = ResponseParams::zeros(1, 2, 1, 1);
  p.delta[0] = 1.0;
  p.beta[0] = 2.0;
  const VectorXd V = utilities(p, d, 0, 0);
  CHECK(V[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(V[1] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("utilities match a scalar-loop reference") {
  const int J = 5, d_x = 3, d_z = 3;
  const auto d = random_panel(2, J, d_x, d_z, {{0, 1}, {4}}, 7);
  const auto p = random_params(2, J, d_x, d_z, 11);
  for (int i = 0; i < 2; ++i) {
    for (int t = 0; t < d.subjects[i].T(); ++t) {
      const VectorXd V = utilities(p, d, i, t);
      for (int j = 0; j < J; ++j) {
        double ref = p.delta[j];
        for (int k = 0; k < d_x; ++k) ref += d.x_at(i, t, j)[k] * p.beta[k];
        for (int k = 0; k < d_z; ++k) ref += d.z_at(i, t, j)[k] * p.b[i][k];
        CHECK(std::abs(V[j] - ref) < 1e-14);
      }
    }
  }
  CHECK_THROWS_AS(utilities(p, d, 0, 99), std::out_of_range);
}

TEST_CASE("choice_prob: singleton set is degenerate") {
  VectorXd V(3);
  V << 0.7, -2.0, 1.1;
  const CsRow C{0, 1, 0};
  CHECK(choice_prob(1, C, V) == 1.0);
  CHECK(choice_prob(0, C, V) == 0.0);
  CHECK(choice_prob(2, C, V) == 0.0);
}

TEST_CASE("choice_prob: constant utilities give 1/m") {
  VectorXd V = VectorXd::Constant(5, 3.7);
  const CsRow C{1, 0, 1, 1, 0};
  for (int j : {0, 2, 3}) CHECK(choice_prob(j, C, V) == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("choice_prob survives huge utilities via the log-sum-exp shift") {
  VectorXd V(2);
  V << 1000.0, 1001.0;
  const CsRow C{1, 1};
  const double p1 = choice_prob(1, C, V);
  const double want = std::exp(1.0) / (1.0 + std::exp(1.0));
  CHECK(std::isfinite(p1));
  CHECK(p1 == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("choice_prob rejects an empty consideration set") {
  VectorXd V = VectorXd::Zero(3);
  CHECK_THROWS_AS(choice_prob(0, CsRow{0, 0, 0}, V), std::invalid_argument);
}

TEST_CASE("subject_loglik: uniform case and structural zero") {
  const auto d = random_panel(1, 4, 1, 1, {{0, 1, 2}}, 5);
  const auto p = ResponseParams::zeros(1, 4, 1, 1);
  SUBCASE("full set, zero utilities") {
    PanelDataset dz = d;
    for (auto& v : dz.subjects[0].x) v = 0.0;
    for (auto& v : dz.subjects[0].z) v = 0.0;
    CHECK(subject_loglik(p, dz, CsRow{1, 1, 1, 1}, 0) == doctest::Approx(3 * std::log(0.25)).epsilon(1e-12));
  }
  SUBCASE("excluding an observed response gives -inf") {
    CHECK(subject_loglik(p, d, CsRow{1, 0, 1, 1}, 0) == kNegInf);
  }
}

TEST_CASE("subject_loglik matches the brute-force product") {
  const auto d = random_panel(1, 4, 2, 2, {{0, 1, 3, 0, 2}}, 13);
  const auto p = random_params(1, 4, 2, 2, 17);
  const CsRow C{1, 1, 1, 1};
  double ref = 0.0;
  for (int t = 0; t < 5; ++t) {
    const VectorXd V = utilities(p, d, 0, t);
    double denom = 0.0;
    for (int j = 0; j < 4; ++j) denom += std::exp(V[j]);
    ref += std::log(std::exp(V[d.subjects[0].y[t]]) / denom);
  }
  CHECK(subject_loglik(p, d, C, 0) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("panel_loglik sums subject contributions") {
  const auto d = random_panel(10, 4, 1, 1, std::vector<std::vector<int>>(10, {0, 1, 2}), 19);
  const auto p = random_params(10, 4, 1, 1, 23);
  const auto C = ConsiderationState::full(10, 4);
  SUBCASE("additivity") {
    double ref = 0.0;
    for (int i = 0; i < 10; ++i) ref += subject_loglik(p, d, C.rows[i], i);
    CHECK(panel_loglik(p, d, C) == doctest::Approx(ref).epsilon(1e-10));
  }
  SUBCASE("single subject reduces to subject_loglik") {
    auto d1 = d;
    d1.n = 1;
    d1.subjects.resize(1);
    auto p1 = p;
    p1.b.resize(1);
    ConsiderationState C1;
    C1.rows = {C.rows[0]};
    CHECK(panel_loglik(p1, d1, C1) == doctest::Approx(subject_loglik(p, d, C.rows[0], 0)).epsilon(1e-12));
  }
  SUBCASE("-inf propagates") {
    ConsiderationState Cx = C;
    Cx.rows[3][d.subjects[3].y[0]] = 0;
    CHECK(panel_loglik(p, d, Cx) == kNegInf);
  }
}

TEST_CASE("normalization and shift invariance hold for random sets") {
  Rng rng(31);
  for (int rep = 0; rep < 300; ++rep) {
    const int J = 2 + static_cast<int>(rng.below(8));
    VectorXd V(J);
    for (int j = 0; j < J; ++j) V[j] = 4.0 * rng.normal();
    CsRow C(J, 0);
    while (cs_size(C) == 0)
      for (int j = 0; j < J; ++j) C[j] = rng.bernoulli(0.5);
    double total = 0.0;
    for (int j = 0; j < J; ++j) total += choice_prob(j, C, V);
    CHECK(std::abs(total - 1.0) < 1e-12);

    const double kappa = 10.0 * rng.normal();
    const VectorXd Vs = V.array() + kappa;
    for (int j = 0; j < J; ++j) CHECK(std::abs(choice_prob(j, C, Vs) - choice_prob(j, C, V)) < 1e-12);
  }
}

TEST_CASE("removing a non-chosen item never decreases remaining probabilities") {
  Rng rng(37);
  for (int rep = 0; rep < 300; ++rep) {
    const int J = 3 + static_cast<int>(rng.below(6));
    VectorXd V(J);
    for (int j = 0; j < J; ++j) V[j] = 3.0 * rng.normal();
    CsRow C(J, 1);
    const int drop = static_cast<int>(rng.below(J));
    CsRow C2 = C;
    C2[drop] = 0;
    for (int j = 0; j < J; ++j) {
      if (j == drop) continue;
      CHECK(choice_prob(j, C2, V) >= choice_prob(j, C, V) - 1e-15);
    }
  }
}
