#include <doctest.h>

#include "csmix/rng.hpp"

#include <cmath>
#include <vector>

using namespace csmix;

TEST_CASE("derive gives reproducible independent streams") {
  Rng a = Rng::derive(42, {1, 2, 3});
  Rng b = Rng::derive(42, {1, 2, 3});
  Rng c = Rng::derive(42, {1, 2, 4});
  bool same = true, diff = false;
  for (int k = 0; k < 100; ++k) {
    const auto va = a.next();
    same = same && (va == b.next());
    diff = diff || (va != c.next());
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("uniform variants stay inside their ranges") {
  Rng rng(9);
  for (int k = 0; k < 200000; ++k) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  for (int k = 0; k < 200000; ++k) {
    const double u = rng.uniform_oc();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("normal moments") {
  Rng rng(1);
  const int N = 400000;
  double s = 0, s2 = 0;
  for (int k = 0; k < N; ++k) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / N) < 0.01);
  CHECK(std::abs(s2 / N - 1.0) < 0.01);
}

TEST_CASE("gamma moments, including shape below one") {
  Rng rng(2);
  for (const double shape : {0.25, 0.9, 2.5, 7.0}) {
    const double rate = 1.7;
    const int N = 300000;
    double s = 0, s2 = 0;
    for (int k = 0; k < N; ++k) {
      const double x = rng.gamma(shape, rate);
      s += x;
      s2 += x * x;
    }
    const double mean = s / N;
    const double var = s2 / N - mean * mean;
    CHECK(mean == doctest::Approx(shape / rate).epsilon(0.02));
    CHECK(var == doctest::Approx(shape / (rate * rate)).epsilon(0.05));
  }
}

TEST_CASE("beta is safe for tiny shapes and never hits 0 or 1") {
  Rng rng(3);
  const double a = 0.02, b = 0.05;
  double s = 0;
  const int N = 200000;
  for (int k = 0; k < N; ++k) {
    const double x = rng.beta(a, b);
    CHECK(x > 0.0);
    CHECK(x < 1.0);
    s += x;
  }
  CHECK(s / N == doctest::Approx(a / (a + b)).epsilon(0.03));
}

TEST_CASE("below is in range and roughly uniform") {
  Rng rng(4);
  std::vector<int> counts(7, 0);
  const int N = 140000;
  for (int k = 0; k < N; ++k) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  for (int c : counts) CHECK(std::abs(c - N / 7) < 800);
}

TEST_CASE("permutation visits every index") {
  Rng rng(5);
  const auto p = rng.permutation(50);
  std::vector<char> seen(50, 0);
  for (int v : p) {
    REQUIRE(v >= 0);
    REQUIRE(v < 50);
    seen[v] = 1;
  }
  for (char s : seen) CHECK(s == 1);
}

TEST_CASE("categorical_logw matches weights") {
  Rng rng(6);
  const std::vector<double> logw = {std::log(0.2), std::log(0.5), std::log(0.3)};
  std::vector<double> freq(3, 0);
  const int N = 200000;
  for (int k = 0; k < N; ++k) freq[rng.categorical_logw(logw)] += 1.0;
  CHECK(freq[0] / N == doctest::Approx(0.2).epsilon(0.03));
  CHECK(freq[1] / N == doctest::Approx(0.5).epsilon(0.02));
  CHECK(freq[2] / N == doctest::Approx(0.3).epsilon(0.03));
}
