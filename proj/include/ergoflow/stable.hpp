#pragma once

#include <cstdint>
#include <vector>

#include "ergoflow/paths.hpp"
#include "ergoflow/rng.hpp"

namespace ergoflow {

// One-sided alpha-stable subordinator, pinned down by its Laplace transform
//   E exp(-w Z(1)) = exp(-lambda w^alpha),  0 < alpha < 1, lambda > 0.
struct StableSpec {
  double alpha;
  double lambda;
};

// scale that makes the inverse process have mean sin(pi a)/(pi a) at time 1;
// all renewal-limit statements below are normalized against it
double canonical_lambda(double alpha);
StableSpec canonical_spec(double alpha);

// the constants attached to index alpha by the limit theorems
struct ConstantTable {
  double alpha;
  double c;        // sin(pi a)/(pi a) = 1/(Gamma(1-a) Gamma(1+a))
  double c_alpha;  // a^(1-a) (1-a)^a / Gamma(3-a)
  double c_check;  // Gamma(3-a) / (a (1-a))
  double c_hat;    // 1 / c_check
  double c_tilde;  // a^a (1-a)^(1-a)
};
ConstantTable constants(double alpha);

// Kanter's representation: u uniform on (0,pi), w standard exponential
double kanter_value(double alpha, double lambda, double u, double w);

// one draw of Z(1)
double sample_stable(RngStream& g, const StableSpec& spec);

// E[ Z(1)^-s ] = Gamma(s/alpha) / (alpha Gamma(s) lambda^(s/alpha)), s > 0
double stable_negative_moment(const StableSpec& spec, double s);

// mean and variance of the inverse process at time 1,
// via hat Z(1) =law Z(1)^-alpha
double ml_mean(const StableSpec& spec);
double ml_variance(const StableSpec& spec);

// step-path subordinator on the grid {k/steps_per_unit}, k = 0..n, built
// from iid increments with Laplace scale lambda/steps_per_unit
PiecewisePath simulate_subordinator(RngStream& g, const StableSpec& spec,
                                    double t_hi, int steps_per_unit);

// inverse subordinator path on [0, horizon]: simulate Z until it exceeds the
// horizon, then take the generalized inverse
PiecewisePath mittag_leffler_path(RngStream& g, const StableSpec& spec,
                                  double horizon, int steps_per_unit);

// one draw of hat Z(t), using hat Z(t) =law t^alpha Z(1)^-alpha
double sample_ml(RngStream& g, const StableSpec& spec, double t);

// n+1 evenly spaced points on [lo, hi]
std::vector<double> uniform_grid(double lo, double hi, int n);
// geometrically spaced points lo * ratio^k clipped at hi (ratio > 1)
std::vector<double> geometric_grid(double lo, double hi, double ratio);

}  // namespace ergoflow
