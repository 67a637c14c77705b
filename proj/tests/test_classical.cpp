#include "doctest.h"

#include <cmath>
#include <numeric>

#include "ratchet/classical.hpp"

using namespace ratchet;
using namespace ratchet::classical;

TEST_CASE("sample_initial") {
  const auto a = sample_initial(1000, 42);
  const auto b = sample_initial(1000, 42);
  REQUIRE(a.states.size() == 1000);
  CHECK(a.states == b.states);
  CHECK_FALSE(sample_initial(1000, 43).states == a.states);
  CHECK_THROWS_AS(sample_initial(0, 1), ConfigError);

  const auto big = sample_initial(1000000, 7);
  double mean = 0.0;
  for (const auto& s : big.states) {
    REQUIRE(s.x >= 0.0);
    REQUIRE(s.x < kTwoPi);
    REQUIRE(s.p >= -kPi);
    REQUIRE(s.p < kPi);
    mean += s.p;
  }
  mean /= 1e6;
  CHECK(std::abs(mean) < 4.0 / 1000.0 * (kPi / std::sqrt(3.0)));
}

TEST_CASE("map_step examples") {
  const auto p = make_params(7.5, 0.3, 0.411);
  const auto s = map_step({0.0, 0.0}, p);
  CHECK(s.p == doctest::Approx(3.75));
  CHECK(s.x == doctest::Approx(3.75));

  const auto damp = map_step({1.0, 2.0}, make_params(0.0, 0.5, 0.1));
  CHECK(damp.p == 1.0);
  CHECK(damp.x == 2.0);

  const auto free = make_params(0.0, 1.0, 0.1);
  const auto f = map_step({0.4, -1.7}, free);
  CHECK(f.p == -1.7);
  CHECK(f.x == doctest::Approx(0.4 - 1.7));
}

TEST_CASE("evolve_ensemble") {
  const auto p = make_params(7.5, 0.3, 0.411);
  const auto e0 = sample_initial(200, 3);

  CHECK(evolve_ensemble(e0, p, 0).states == e0.states);

  SUBCASE("geometric damping") {
    const auto e = evolve_ensemble(e0, make_params(0.0, 0.5, 0.1), 20);
    CHECK(e.steps_done == 20);
    for (const auto& s : e.states) CHECK(std::abs(s.p) <= std::ldexp(kPi, -20) + 1e-6);
  }
  SUBCASE("semigroup") {
    const auto ab = evolve_ensemble(evolve_ensemble(e0, p, 17), p, 23);
    const auto whole = evolve_ensemble(e0, p, 40);
    CHECK(ab.states == whole.states);
    CHECK(ab.steps_done == 40);
  }
  SUBCASE("worker count does not change results") {
    CHECK(evolve_ensemble(e0, p, 100, 1).states == evolve_ensemble(e0, p, 100, 3).states);
  }
  SUBCASE("tau invariance") {
    const auto a = evolve_ensemble(e0, make_params(7.5, 0.3, 0.411), 500);
    const auto b = evolve_ensemble(e0, make_params(7.5, 0.3, 0.068), 500);
    CHECK(a.states == b.states);
  }
}

TEST_CASE("classical_current") {
  Ensemble e;
  e.states = {{0.0, kTwoPi}, {1.0, kTwoPi}, {2.0, kTwoPi}};
  CHECK(classical_current(e) == doctest::Approx(kTwoPi));
  e.states = {{0.0, 1.7}, {1.0, -1.7}};
  CHECK(classical_current(e) == 0.0);
  CHECK_THROWS(classical_current(Ensemble{}));
}

// Independent check of the B1 attractor: a period-1 point of the map must
// satisfy x' = x + 2 pi m with p' = p, i.e. p* = 2 pi m and
// (1 - gamma) p* = F(x*).
TEST_CASE("B1 core attractor satisfies the fixed-point condition") {
  const auto p = make_params(7.5, 0.3, 0.137);
  auto e = evolve_ensemble(sample_initial(2000, 11), p, 2000);
  const auto fixed = period_one_points(e.states, p);
  REQUIRE(fixed.size() > 1900);
  for (const auto& s : fixed) {
    const double m = std::round(s.p / kTwoPi);
    CHECK(std::abs(s.p - kTwoPi * m) < 1e-6);
    CHECK(std::abs((1.0 - p.gamma()) * s.p - kick_force(s.x, p)) < 1e-6);
  }
  CHECK(std::abs(classical_current(e) - kTwoPi) < 0.3);
}

TEST_CASE("map contracts phase-space area by gamma per step") {
  const auto p = make_params(3.3, 0.6, 0.1);
  const double eps = 1e-7;
  State a{1.1, 0.4}, b{1.1 + eps, 0.4}, c{1.1, 0.4 + eps};
  auto area = [](State u, State v, State w) {
    return 0.5 * std::abs((v.x - u.x) * (w.p - u.p) - (w.x - u.x) * (v.p - u.p));
  };
  double prev = area(a, b, c);
  for (int step = 0; step < 4; ++step) {
    a = map_step(a, p);
    b = map_step(b, p);
    c = map_step(c, p);
    const double now = area(a, b, c);
    CHECK(now / prev == doctest::Approx(p.gamma()).epsilon(1e-4));
    prev = now;
  }
}

TEST_CASE("discretize_momentum") {
  SUBCASE("point mass") {
    Ensemble e;
    e.states.assign(50, State{0.3, 0.0});
    for (int bins : {2, 5, 729}) {
      const auto d = discretize_momentum(e, bins, 10.0);
      int nonzero = 0;
      for (double v : d.prob) nonzero += v > 0.0;
      CHECK(nonzero == 1);
      CHECK(*std::max_element(d.prob.begin(), d.prob.end()) == 1.0);
    }
  }
  SUBCASE("uniform spread") {
    Ensemble e;
    const int n = 100000;
    for (int i = 0; i < n; ++i) e.states.push_back({0.0, -5.0 + 10.0 * (i + 0.5) / n});
    const auto d = discretize_momentum(e, 10, 10.0);
    for (double v : d.prob) CHECK(v == doctest::Approx(0.1).epsilon(1e-3));
    CHECK(d.edge_mass == 0.0);
  }
  SUBCASE("out-of-span mass is folded and reported") {
    Ensemble e;
    e.states = {{0, 0.0}, {0, 100.0}, {0, -100.0}, {0, 0.5}};
    const auto d = discretize_momentum(e, 4, 4.0);
    CHECK(std::accumulate(d.prob.begin(), d.prob.end(), 0.0) == doctest::Approx(1.0));
    CHECK(d.edge_mass == 0.5);
    CHECK(d.prob.front() == 0.25);
    CHECK(d.prob.back() == 0.25);
  }
  SUBCASE("centre cell straddles zero for odd bin counts") {
    Ensemble e;
    e.states = {{0, 0.0}};
    const auto d = discretize_momentum(e, 729, 729 * 0.137);
    CHECK(d.prob[364] == 1.0);
    CHECK(d.momentum[364] == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(discretize_momentum(sample_initial(3, 1), 1, 1.0), ConfigError);
}
