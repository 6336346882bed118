#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "ergoflow/renewal.hpp"
#include "ergoflow/rng.hpp"
#include "ergoflow/shift_models.hpp"

using namespace ergoflow;

namespace {

bool tower_equal(const std::vector<TowerState>& a,
                 const std::vector<TowerState>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].k != b[i].k || a[i].j != b[i].j) return false;
  return true;
}

template <typename T>
std::vector<T> prefix(const std::vector<T>& v, std::size_t n) {
  return std::vector<T>(v.begin(), v.begin() + n);
}

}  // namespace

TEST_CASE("invariant vector: tail sums and closed forms") {
  GapPMF t = GapPMF::table({0.5, 0.3, 0.2});
  std::vector<double> pi = invariant_vector(t);
  REQUIRE(pi.size() == 3);
  CHECK(pi[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pi[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pi[2] == doctest::Approx(0.2).epsilon(1e-14));

  GapPMF geo = GapPMF::geometric(0.5, 12);
  std::vector<double> pg = invariant_vector(geo);
  for (std::size_t k = 1; k <= pg.size(); ++k)
    CHECK(pg[k - 1] == std::pow(2.0, -static_cast<double>(k - 1)));
  // folded tail: p_K absorbs the rest, so the table still sums to one
  CHECK(geo.p.back() == std::pow(2.0, -11.0));

  GapPMF par = GapPMF::pareto_int(0.5, 100);
  std::vector<double> pp = invariant_vector(par);
  for (std::size_t k = 1; k <= pp.size(); ++k)
    CHECK(pp[k - 1] == std::pow(static_cast<double>(k), -0.5));

  // pi is nonincreasing with pi_1 = 1 for arbitrary tables
  RngStream g(7001, 0);
  for (int rep = 0; rep < 200; ++rep) {
    std::size_t K = 1 + g.below(20);
    std::vector<double> raw(K);
    double sum = 0.0;
    for (double& v : raw) {
      v = g.u01();
      sum += v;
    }
    for (double& v : raw) v /= sum;
    std::vector<double> q = invariant_vector(GapPMF::table(raw));
    CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 1; k < K; ++k) CHECK(q[k] <= q[k - 1] + 1e-15);
  }
}

TEST_CASE("invariant vector is a fixed point of the countdown matrix") {
  CHECK(invariant_residual(GapPMF::pareto_int(0.5, 10000)) < 1e-12);
  CHECK(invariant_residual(GapPMF::geometric(0.5, 10000)) < 1e-12);
  CHECK(invariant_residual(GapPMF::table({0.5, 0.3, 0.2})) < 1e-12);

  RngStream g(7002, 0);
  for (int rep = 0; rep < 200; ++rep) {
    std::size_t K = 2 + g.below(50);
    std::vector<double> raw(K);
    double sum = 0.0;
    for (double& v : raw) {
      v = g.u01();
      sum += v;
    }
    for (double& v : raw) v /= sum;
    CHECK(invariant_residual(GapPMF::table(raw)) < 1e-12);
  }
}

TEST_CASE("total mass: closed forms and the divergent family") {
  MassResult t = total_mass(GapPMF::table({0.5, 0.3, 0.2}));
  CHECK_FALSE(t.diverged);
  CHECK(t.value == doctest::Approx(1.7).epsilon(1e-14));

  // geometric mean comes from the identity 1/q, not the truncated table
  MassResult geo = total_mass(GapPMF::geometric(0.5, 30));
  CHECK_FALSE(geo.diverged);
  CHECK(geo.value == 2.0);

  MassResult par = total_mass(GapPMF::pareto_int(0.5, 1000));
  CHECK(par.diverged);
  CHECK(std::isinf(par.value));
}

TEST_CASE("markov sampler: inverse CDF over the first row") {
  MarkovSampler s(GapPMF::table({0.5, 0.3, 0.2}));
  CHECK(s.draw(0.6) == 2);
  CHECK(s.draw(0.5) == 1);  // u <= cum_k convention: 0.5 lands on state 1
  CHECK(s.draw(0.2) == 1);
  CHECK(s.draw(0.8) == 2);
  CHECK(s.draw(0.81) == 3);
  CHECK(s.draw(0.999) == 3);

  // monotone in u, range within 1..K
  MarkovSampler geo(GapPMF::geometric(0.3, 64));
  RngStream g(7003, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    double u = g.u01(), v = g.u01();
    if (u > v) std::swap(u, v);
    long a = geo.draw(u), b = geo.draw(v);
    CHECK(a <= b);
    CHECK(a >= 1);
    CHECK(b <= 64);
  }
}

TEST_CASE("orbit structure: the four sequences tell one story") {
  RngStream g(7004, 0);
  ShiftOrbit o = simulate_shift_orbit(GapLaw::geometric_law(0.5), 200, g);
  REQUIRE(o.markov.size() == 200);
  REQUIRE(o.tower.size() == 200);
  REQUIRE(o.event.size() == 200);
  REQUIRE(o.increment.size() == 201);

  // orbits start on the section
  CHECK(o.markov[0] == 1);
  CHECK(o.tower[0].j == 0);
  CHECK(o.event[0] == 1);
  CHECK(o.increment[0] == 0);

  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(o.tower[i].j >= 0);
    CHECK(o.tower[i].j < o.tower[i].k);
    CHECK(o.event[i] == (o.tower[i].j == 0 ? 1 : 0));
    CHECK(o.event[i] == (o.markov[i] == 1 ? 1 : 0));
    CHECK(o.increment[i + 1] - o.increment[i] == o.event[i]);
  }
  // countdown dynamics: states above 1 decrease by one
  for (std::size_t i = 0; i + 1 < 200; ++i)
    if (o.markov[i] > 1) CHECK(o.markov[i + 1] == o.markov[i] - 1);
}

TEST_CASE("single-step dynamics: tower climb and countdown") {
  auto no_draw = []() -> long {
    throw std::logic_error("gap drawn where none should be needed");
  };
  TowerState a = tower_step({3, 1}, no_draw);
  CHECK(a.k == 3);
  CHECK(a.j == 2);
  TowerState b = tower_step({3, 2}, [] { return 7L; });
  CHECK(b.k == 7);
  CHECK(b.j == 0);

  CHECK(markov_step(3, no_draw) == 2);
  CHECK(markov_step(2, no_draw) == 1);
  CHECK(markov_step(1, [] { return 5L; }) == 5);

  // jump out of state 1 via the inverse-CDF row
  MarkovSampler s(GapPMF::table({0.5, 0.3, 0.2}));
  CHECK(markov_step(1, [&] { return s.draw(0.6); }) == 2);
}

TEST_CASE("conjugacy maps: hand examples") {
  std::vector<long> mk{5, 4, 3, 2, 1, 3, 2, 1};
  CHECK(markov_to_event(mk) == std::vector<int>{0, 0, 0, 0, 1, 0, 0, 1});

  CHECK(event_to_increment({1, 0, 0, 1}) == std::vector<long>{0, 1, 1, 1, 2});
  CHECK(increment_to_event({0, 1, 1, 1, 2}) == std::vector<int>{1, 0, 0, 1});

  std::vector<TowerState> tw{{2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
  CHECK(tower_to_event(tw) == std::vector<int>{1, 0, 1, 0, 0});
  CHECK(tower_to_markov(tw) == std::vector<long>{1, 2, 1, 3, 2});

  // block-reconstructing maps return the resolvable prefix
  CHECK(event_to_markov({1, 0, 0, 1}) == std::vector<long>{1, 3, 2, 1});
  CHECK(event_to_markov({1, 0, 0, 1, 0}) == std::vector<long>{1, 3, 2, 1});
  CHECK(tower_equal(event_to_tower({1, 0, 1, 0, 0, 1}), tw));
  CHECK(tower_equal(markov_to_tower({1, 2, 1, 3, 2}),
                    {{2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}}));
  CHECK(tower_equal(markov_to_tower({1, 3, 2, 1}), {{3, 0}, {3, 1}, {3, 2}}));
  CHECK(tower_equal(markov_to_tower({1, 1, 2}), {{1, 0}, {2, 0}, {2, 1}}));
}

TEST_CASE("conjugacy holds bitwise along a long shared-stream orbit") {
  RngStream g(7005, 0);
  const long n = 100000;
  ShiftOrbit o = simulate_shift_orbit(GapLaw::pareto_int(0.5), n, g);

  // pointwise maps reproduce the derived sequences exactly
  CHECK(tower_to_markov(o.tower) == o.markov);
  CHECK(tower_to_event(o.tower) == o.event);
  CHECK(markov_to_event(o.markov) == o.event);
  CHECK(event_to_increment(o.event) == o.increment);
  CHECK(increment_to_event(o.increment) == o.event);

  // structural maps reproduce the prefix they can resolve
  std::size_t last = o.event.size();
  while (o.event[--last] == 0) {
  }
  CHECK(event_to_markov(o.event) == prefix(o.markov, last + 1));
  CHECK(tower_equal(event_to_tower(o.event), prefix(o.tower, last)));
  std::size_t mlen = o.markov.back() == 1 ? o.markov.size() - 1 : o.markov.size();
  CHECK(tower_equal(markov_to_tower(o.markov), prefix(o.tower, mlen)));

  // compositions close the remaining ordered pairs
  CHECK(event_to_increment(tower_to_event(o.tower)) == o.increment);
  CHECK(event_to_increment(markov_to_event(o.markov)) == o.increment);
  CHECK(event_to_markov(increment_to_event(o.increment)) ==
        prefix(o.markov, last + 1));

  // step-evolving each model against a fresh copy of the same stream lands
  // on the same words: the gap draws happen in identical order
  RngStream g2(7005, 0);
  std::vector<long> stepped{1};
  while (static_cast<long>(stepped.size()) < n)
    stepped.push_back(
        markov_step(stepped.back(), [&] { return std::lround(sample_gap(g2, GapLaw::pareto_int(0.5))); }));
  CHECK(stepped == o.markov);

  RngStream g3(7005, 0);
  auto draw3 = [&] { return std::lround(sample_gap(g3, GapLaw::pareto_int(0.5))); };
  std::vector<TowerState> climbed{{draw3(), 0}};
  while (static_cast<long>(climbed.size()) < n)
    climbed.push_back(tower_step(climbed.back(), draw3));
  CHECK(tower_equal(climbed, o.tower));
}

TEST_CASE("discrete order-two averages: frozen hand value") {
  // constant gap 2: countdown word 1,2,1,2,1
  std::vector<long> w{1, 2, 1, 2, 1};
  auto phi = [](long m) { return m == 1 ? 1.0 : 0.0; };
  auto ahat = [](double t) { return std::sqrt(t); };
  OrderTwoPair p = discrete_order_two(w, phi, 3, ahat);
  CHECK(p.form_i == doctest::Approx(1.5824086331317291).epsilon(1e-14));
  CHECK(p.form_ii == doctest::Approx(1.2872726592996708).epsilon(1e-14));

  // zero observable annihilates both forms
  OrderTwoPair z = discrete_order_two(w, [](long) { return 0.0; }, 3, ahat);
  CHECK(z.form_i == 0.0);
  CHECK(z.form_ii == 0.0);
}

TEST_CASE("streaming order-two run matches the word-based computation") {
  GapLaw law = GapLaw::pareto_int(0.5);
  auto phi = [](long m) { return m == 2 ? 1.0 : 0.0; };
  const long k = 5000;

  RngStream g1(7006, 0);
  ShiftOrbit o = simulate_shift_orbit(law, k + 1, g1);
  OrderTwoPair word = discrete_order_two(o.markov, phi, k, normalizers(law).ahat);

  RngStream g2(7006, 0);
  OrderTwoPair run = discrete_order_two_run(law, phi, k, g2);
  CHECK(run.form_i == word.form_i);
  CHECK(run.form_ii == word.form_ii);
}

TEST_CASE("order-two ensemble tracks the occupation target") {
  // ensemble mean of the Chung-Erdos form over 20 orbits; the target is
  // c * pi_1 = 2/pi for the indicator of the section state
  GapLaw law = GapLaw::pareto_int(0.5);
  auto phi = [](long m) { return m == 1 ? 1.0 : 0.0; };
  const long k = 100000;
  double target = constants(0.5).c;
  double acc = 0.0;
  const int paths = 20;
  for (int i = 0; i < paths; ++i) {
    RngStream g(7007, static_cast<std::uint64_t>(i));
    acc += discrete_order_two_run(law, phi, k, g).form_ii;
  }
  double mean = acc / paths;
  CHECK(std::abs(mean - target) / target < 0.15);
}

TEST_CASE("occupation counts: exact block arithmetic and limit ratios") {
  GapLaw law = GapLaw::geometric_law(0.5);

  // streamed counts equal a brute-force count over the materialized orbit
  RngStream g1(7008, 0), g2(7008, 0);
  std::vector<long> fast = occupation_counts(law, 500, 8, g1);
  ShiftOrbit o = simulate_shift_orbit(law, 500, g2);
  for (long m = 1; m <= 8; ++m) {
    long brute = 0;
    for (long s : o.markov) brute += s == m ? 1 : 0;
    CHECK(fast[m - 1] == brute);
  }

  // geometric occupation ratios: visits(m)/visits(1) -> pi_m = 2^-(m-1)
  RngStream g3(7009, 0);
  std::vector<long> cnt = occupation_counts(law, 200000, 4, g3);
  for (long m = 2; m <= 4; ++m) {
    double ratio = static_cast<double>(cnt[m - 1]) / cnt[0];
    double target = std::pow(2.0, -static_cast<double>(m - 1));
    CHECK(std::abs(ratio - target) / target < 0.05);
  }

  // heavy-tailed case (infinite invariant measure): same Hopf-type limit
  RngStream g4(7010, 0);
  std::vector<long> hv = occupation_counts(GapLaw::pareto_int(0.6), 1000000, 2, g4);
  double ratio = static_cast<double>(hv[1]) / hv[0];
  double target = std::pow(2.0, -0.6);
  CHECK(std::abs(ratio - target) / target < 0.08);
}

TEST_CASE("orbit dump: exact csv") {
  RngStream g(7011, 0);
  ShiftOrbit o = simulate_shift_orbit(GapLaw::table_law({0.0, 1.0}), 4, g);
  std::ostringstream os;
  dump_orbit_csv(os, o);
  CHECK(os.str() == "n,state,Y,N\n0,1,1,0\n1,2,0,1\n2,1,1,1\n3,2,0,2\n");
}

TEST_CASE("shift model domain errors") {
  CHECK_THROWS_AS(GapPMF::table({0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(GapPMF::table({1.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(GapPMF::pareto_int(1.2, 100), std::invalid_argument);
  CHECK_THROWS_AS(GapPMF::geometric(0.0, 100), std::invalid_argument);

  MarkovSampler s(GapPMF::table({0.5, 0.5}));
  CHECK_THROWS_AS(s.draw(0.0), std::invalid_argument);
  CHECK_THROWS_AS(s.draw(1.0), std::invalid_argument);

  RngStream g(7012, 0);
  CHECK_THROWS_AS(simulate_shift_orbit(GapLaw::pareto_cont(0.5), 10, g),
                  std::invalid_argument);
  CHECK_THROWS_AS(tower_step({3, 3}, [] { return 1L; }), std::invalid_argument);
  CHECK_THROWS_AS(markov_step(0, [] { return 1L; }), std::invalid_argument);

  CHECK_THROWS_AS(increment_to_event({0, 1, 3}), std::invalid_argument);
  CHECK_THROWS_AS(increment_to_event({}), std::invalid_argument);
  CHECK_THROWS_AS(event_to_markov({0, 0, 0}), std::domain_error);
  CHECK_THROWS_AS(event_to_tower({0, 1, 0}), std::domain_error);
  CHECK_THROWS_AS(event_to_tower({1, 0, 0}), std::domain_error);
  CHECK_THROWS_AS(markov_to_tower({3, 2, 1}), std::domain_error);
  CHECK_THROWS_AS(markov_to_tower({1}), std::domain_error);
  CHECK_THROWS_AS(markov_to_tower({1, 5, 3}), std::invalid_argument);

  std::vector<long> w{1, 2, 1};
  auto phi = [](long) { return 1.0; };
  auto ahat = [](double t) { return t; };
  CHECK_THROWS_AS(discrete_order_two(w, phi, 3, ahat), std::invalid_argument);
  CHECK_THROWS_AS(discrete_order_two(w, phi, 1, ahat), std::invalid_argument);
  // light-tailed laws have no alpha-normalizer to average against
  CHECK_THROWS_AS(discrete_order_two_run(GapLaw::geometric_law(0.5), phi, 10, g),
                  std::domain_error);
}
