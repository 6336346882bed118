#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "ergoflow/paths.hpp"
#include "test_util.hpp"

using namespace ergoflow;
using testutil::random_bv_step_path;
using testutil::random_increasing_linear;
using testutil::random_step_path;

TEST_CASE("step evaluation follows the cadlag convention") {
  PiecewisePath p(PathKind::step, {0, 1, 2}, {0, 2, 5});
  CHECK(p(0) == 0);
  CHECK(p(0.999) == 0);
  CHECK(p(1) == 2);
  CHECK(p(1.5) == 2);
  CHECK(p(2) == 5);
  CHECK(p.left_limit(1) == 0);
  CHECK(p.left_limit(2) == 2);
  CHECK(p.left_limit(0) == 0);
  CHECK_THROWS_AS(p(-0.1), std::domain_error);
  CHECK_THROWS_AS(p(2.1), std::domain_error);
}

TEST_CASE("linear evaluation interpolates the knots") {
  PiecewisePath p(PathKind::linear, {0, 2, 3}, {0, 4, 4});
  CHECK(p(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(p(2.5) == 4);
  CHECK(p.left_limit(2) == p(2));
}

TEST_CASE("generalized inverse of a step staircase") {
  // 0 on [0,1), 2 on [1,2), 5 on [2,3]
  PiecewisePath f(PathKind::step, {0, 1, 2, 3}, {0, 2, 5, 5});
  PiecewisePath fi = generalized_inverse(f);
  CHECK(fi.window().lo == 0);
  CHECK(fi.window().hi == 5);
  CHECK(fi(0) == 1);    // first time f exceeds level 0
  CHECK(fi(1.9) == 1);
  CHECK(fi(2) == 2);
  CHECK(fi(4.9) == 2);
  CHECK(fi(5) == 2);
}

TEST_CASE("generalized inverse of a strictly increasing linear path") {
  PiecewisePath f(PathKind::linear, {0, 1, 3}, {0, 2, 8});
  PiecewisePath fi = generalized_inverse(f);
  CHECK(fi.kind() == PathKind::linear);
  CHECK(fi(2) == 1);
  CHECK(fi(5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fi(0) == 0);
}

TEST_CASE("double inversion resolves the path up to its right window edge") {
  PiecewisePath f(PathKind::step, {0, 1, 2, 3}, {0, 2, 5, 5});
  PiecewisePath ff = generalized_inverse(generalized_inverse(f));
  CHECK(ff.window().lo == 1);
  CHECK(ff.window().hi == 2);
  CHECK(ff(1) == 2);
  CHECK(ff(1.9) == 2);
  CHECK(ff.left_limit(2) == 2);

  RngStream g(2024, 1);
  for (int k = 0; k < 1000; ++k) {
    // two jumps at least: a single-jump path inverts to a constant, whose
    // second inverse has an empty window
    PiecewisePath p = random_step_path(g, 2);
    PiecewisePath pp = generalized_inverse(generalized_inverse(p));
    CHECK(testutil::sup_resolved(pp, p) == 0.0);
  }
}

TEST_CASE("scaling flow contracts time by e^-t and value by e^-beta t") {
  PiecewisePath f(PathKind::step, {0, 1, 2}, {0, 2, 5});
  PiecewisePath g = scaling_flow(f, std::log(2.0), 1.0);
  REQUIRE(g.size() == 3);
  CHECK(g.breakpoints()[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.breakpoints()[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.values()[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.values()[2] == doctest::Approx(2.5).epsilon(1e-15));

  // pointwise law (tau_t f)(x) = f(e^t x) e^(-beta t)
  RngStream r(2024, 2);
  for (int k = 0; k < 1000; ++k) {
    PiecewisePath p = random_bv_step_path(r);
    const double t = r.uniform(-1.5, 1.5);
    const double beta = r.uniform(0.2, 3.0);
    PiecewisePath q = scaling_flow(p, t, beta);
    const double et = std::exp(t), ebt = std::exp(-beta * t);
    const Window w = q.window();
    for (int j = 0; j < 8; ++j) {
      const double x = w.lo + (w.hi - w.lo) * (j + 0.5) / 8.0;
      CHECK(q(x) == doctest::Approx(p(std::min(
                        std::max(et * x, p.window().lo), p.window().hi)) *
                                    ebt)
                        .epsilon(1e-10));
    }
  }
}

TEST_CASE("increment flow recenters time and value") {
  PiecewisePath f(PathKind::step, {0, 1, 2, 3}, {0, 2, 5, 5});
  PiecewisePath g = increment_flow(f, 1.0);
  REQUIRE(g.size() == 4);
  CHECK(g.breakpoints().front() == -1);
  CHECK(g.breakpoints().back() == 2);
  CHECK(g(-0.5) == -2);
  CHECK(g(0) == 0);
  CHECK(g(1) == 3);

  RngStream r(2024, 3);
  for (int k = 0; k < 1000; ++k) {
    PiecewisePath p = random_bv_step_path(r);
    const Window w = p.window();
    const double s = r.uniform(w.lo, w.lo + 0.999 * (w.hi - w.lo));
    PiecewisePath q = increment_flow(p, s);
    CHECK(q(0) == 0);  // the flow pins the origin
  }
}

TEST_CASE("flows satisfy the commutation relations") {
  RngStream r(2024, 4);
  for (int k = 0; k < 1000; ++k) {
    PiecewisePath p = random_step_path(r, 2);
    const double lj = testutil::last_jump_time(p);
    const double s = r.uniform(p.window().lo, lj - 1e-9 * (lj - p.window().lo));
    const double t = r.uniform(-1.5, 1.5);
    const double alpha = r.uniform(0.15, 0.9);
    CHECK(commutation_check(p, s, t, alpha) < 1e-9);
  }
}

TEST_CASE("inversion intertwines the scaling flows with rescaled time") {
  RngStream r(2024, 5);
  for (int k = 0; k < 1000; ++k) {
    PiecewisePath p = random_step_path(r, 1);
    const double t = r.uniform(-1.5, 1.5);
    const double alpha = r.uniform(0.15, 0.9);
    PiecewisePath lhs = scaling_flow(generalized_inverse(p), t / alpha, alpha);
    PiecewisePath rhs = generalized_inverse(scaling_flow(p, t, 1.0 / alpha));
    const Window w{std::max(lhs.window().lo, rhs.window().lo),
                   std::min(lhs.window().hi, rhs.window().hi)};
    REQUIRE(w.lo <= w.hi);
    CHECK(essential_sup_distance(lhs, rhs, w) < 1e-9);
  }
}

TEST_CASE("inversion intertwines increment flows on strictly increasing paths") {
  // inverse of (f(.+t) - f(t)) = shift of the inverse by the level f(t);
  // exact only where the path increases at every time, hence linear paths
  RngStream r(2024, 6);
  for (int k = 0; k < 1000; ++k) {
    PiecewisePath p = random_increasing_linear(r);
    const Window w = p.window();
    const double t = r.uniform(w.lo, w.lo + 0.999 * (w.hi - w.lo));
    PiecewisePath lhs = generalized_inverse(increment_flow(p, t));
    PiecewisePath rhs = increment_flow(generalized_inverse(p), p(t));
    CHECK(sup_distance(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("completed graph fills jumps with vertical segments") {
  PiecewisePath p(PathKind::step, {0, 1}, {0, 2});
  auto segs = completed_graph(p);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].x0 == 0);
  CHECK(segs[0].y0 == 0);
  CHECK(segs[0].x1 == 1);
  CHECK(segs[0].y1 == 0);
  CHECK(segs[1].x0 == 1);
  CHECK(segs[1].y0 == 0);
  CHECK(segs[1].x1 == 1);
  CHECK(segs[1].y1 == 2);
}

TEST_CASE("the inverse graph is the reflected graph") {
  RngStream r(2024, 7);
  for (int k = 0; k < 1000; ++k) {
    PiecewisePath p = random_step_path(r, 1);
    auto direct = completed_graph(generalized_inverse(p));
    auto reflected = dual_graph(completed_graph(p));
    CHECK(graphs_equal(direct, reflected, 1e-9));
  }
  for (int k = 0; k < 200; ++k) {
    PiecewisePath p = random_increasing_linear(r);
    auto direct = completed_graph(generalized_inverse(p));
    auto reflected = dual_graph(completed_graph(p));
    CHECK(graphs_equal(direct, reflected, 1e-9));
  }
}

TEST_CASE("first increase commutes with inversion") {
  PiecewisePath f(PathKind::step, {0, 1, 2, 3}, {0, 2, 5, 5});
  CHECK(first_increase(f) == 1);
  CHECK(first_increase(generalized_inverse(f)) == 2);  // = f(1)

  RngStream r(2024, 8);
  for (int k = 0; k < 1000; ++k) {
    PiecewisePath p = random_step_path(r, 2);
    CHECK(first_increase(generalized_inverse(p)) == p(first_increase(p)));
  }
}

TEST_CASE("hahn decomposition reconstructs with minimal variation") {
  RngStream r(2024, 9);
  for (int k = 0; k < 1000; ++k) {
    PiecewisePath p = random_bv_step_path(r);
    auto [plus, minus] = hahn_decompose(p);
    CHECK(plus.is_nondecreasing());
    CHECK(minus.is_nondecreasing());
    CHECK(plus.values().front() == 0);
    CHECK(minus.values().front() == 0);
    const auto& v = p.values();
    double tv = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) tv += std::abs(v[i] - v[i - 1]);
    CHECK(plus.values().back() + minus.values().back() ==
          doctest::Approx(tv).epsilon(1e-12));
    for (std::size_t i = 0; i < v.size(); ++i)
      CHECK(v.front() + plus.values()[i] - minus.values()[i] ==
            doctest::Approx(v[i]).epsilon(1e-12));
  }
}

TEST_CASE("restrict agrees with the original on the sub-window") {
  RngStream r(2024, 10);
  for (int k = 0; k < 1000; ++k) {
    PiecewisePath p =
        (k % 2 == 0) ? random_bv_step_path(r) : random_increasing_linear(r);
    const Window w = p.window();
    double lo = r.uniform(w.lo, w.lo + 0.4 * (w.hi - w.lo));
    double hi = r.uniform(w.lo + 0.6 * (w.hi - w.lo), w.hi);
    PiecewisePath q = p.restrict({lo, hi});
    CHECK(q.window().lo == lo);
    CHECK(q.window().hi == hi);
    for (int j = 0; j < 8; ++j) {
      const double x = std::min(lo + (hi - lo) * j / 7.0, hi);
      CHECK(q(x) == doctest::Approx(p(x)).epsilon(1e-13));
    }
  }
}

TEST_CASE("sup distance is exact across kinds") {
  PiecewisePath a(PathKind::step, {0, 1, 2}, {0, 1, 1});
  PiecewisePath b(PathKind::linear, {0, 2}, {0, 2});
  CHECK(sup_distance(a, b, {0, 2}) == 1.0);  // attained as a left limit at 1
  CHECK(sup_distance(a, a, {0, 2}) == 0.0);
}

TEST_CASE("invalid constructions and domain violations throw") {
  CHECK_THROWS_AS(PiecewisePath(PathKind::step, {0, 1}, {0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(PiecewisePath(PathKind::step, {0}, {0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(PiecewisePath(PathKind::step, {0, 0}, {1, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(PiecewisePath(PathKind::step, {1, 0}, {1, 2}),
                  std::invalid_argument);

  PiecewisePath flat(PathKind::step, {0, 1, 2}, {3, 3, 3});
  CHECK_THROWS_AS(generalized_inverse(flat), std::domain_error);
  PiecewisePath down(PathKind::step, {0, 1, 2}, {3, 1, 2});
  CHECK_THROWS_AS(generalized_inverse(down), std::domain_error);
  PiecewisePath flatlin(PathKind::linear, {0, 1, 2}, {0, 1, 1});
  CHECK_THROWS_AS(generalized_inverse(flatlin), std::domain_error);

  PiecewisePath p(PathKind::step, {0, 1, 2}, {0, 2, 5});
  CHECK_THROWS_AS(increment_flow(p, 2.0), std::domain_error);
  CHECK_THROWS_AS(increment_flow(p, -0.5), std::domain_error);
  CHECK_THROWS_AS(p.restrict({-1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(first_increase(flat), std::domain_error);

  PiecewisePath far(PathKind::step, {10, 11}, {0, 1});
  CHECK_THROWS_AS(sup_distance(p, far), std::domain_error);
}
