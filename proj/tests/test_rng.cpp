#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "vfuse/rng.hpp"

using vfuse::Rng;

TEST_CASE("same seed reproduces the same sequence") {
  Rng a(42), b(42);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds differ early") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 16; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("fork is a pure function of parent key and tag") {
  Rng parent(7);
  Rng c1 = parent.fork(3);
  // Consuming draws from the parent must not change what fork(3) means.
  parent.next_u64();
  parent.next_u64();
  Rng c2 = parent.fork(3);
  for (int i = 0; i < 8; ++i) CHECK(c1.next_u64() == c2.next_u64());
}

TEST_CASE("sibling forks are distinct streams") {
  Rng parent(7);
  Rng a = parent.fork(0);
  Rng b = parent.fork(1);
  int same = 0;
  for (int i = 0; i < 16; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("uniform stays in [0, 1) and fills the range") {
  Rng r(11);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("uniform moments match a flat law") {
  Rng r(5);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform();
    sum += u;
    sq += u * u;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal moments match a standard Gaussian") {
  Rng r(9);
  const int n = 200000;
  double sum = 0.0, sq = 0.0, quad = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = r.normal();
    sum += g;
    sq += g * g;
    quad += g * g * g * g;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  // Fourth moment of N(0,1) is 3; a gross error here flags a broken transform.
  CHECK(quad / n == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("scaled normal applies mean and stddev") {
  Rng r(3);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = r.normal(10.0, 2.0);
    sum += g;
    sq += g * g;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(10.0).epsilon(0.01));
  CHECK(var == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("uniform_int covers [0, n) with near-equal mass") {
  Rng r(13);
  const int n = 7;
  std::vector<int> counts(n, 0);
  for (int i = 0; i < 70000; ++i) {
    int v = r.uniform_int(n);
    REQUIRE(v >= 0);
    REQUIRE(v < n);
    ++counts[v];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("nested forks with distinct tags do not collide") {
  Rng root(1);
  std::set<std::uint64_t> first_draws;
  for (int i = 0; i < 100; ++i) {
    Rng mid = root.fork(i);
    for (int j = 0; j < 10; ++j) first_draws.insert(mid.fork(j).next_u64());
  }
  CHECK(first_draws.size() == 1000);
}
