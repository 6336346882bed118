#pragma once

#include <functional>
#include <vector>

#include "ergoflow/estimators.hpp"
#include "ergoflow/paths.hpp"
#include "ergoflow/rng.hpp"
#include "ergoflow/stable.hpp"

namespace ergoflow {

// Hawkes gauge psi(t) = t^alpha (log log 1/t)^(1-alpha), the exact gauge of
// the subordinator range at small scales.  The inner log log is positive only
// for t < 1/e; above that the gauge is clamped to the bare power t^alpha and
// the flag records it (the gauge only carries meaning at small scales).
struct GaugeValue {
  double value;
  bool clamped;
};
GaugeValue gauge_psi(double t, double alpha);

// One-sided order-two density at the origin of the inverse-process range,
//   (1/S) integral_0^S zhat(e^-s) e^(alpha s) ds,
// computed exactly over the flat pieces of a step path (each piece [lo, hi)
// of height v contributes v (lo^-alpha - hi^-alpha)/alpha after substituting
// u = e^-s).  The path must cover [0, 1] and resolve scale e^-S: its smallest
// positive breakpoint must not exceed e^-S, else a domain error reports the
// finest scale actually resolved.  The ensemble mean over inverse-subordinator
// paths converges to c = sin(pi a)/(pi a) under the canonical normalization.
double order_two_density(const PiecewisePath& zhat, double alpha, double S);

// same average for a closed-form zhat, by the trapezoid rule in s (exact for
// the self-similar profile zhat(t) = c t^alpha, whose integrand is constant)
double order_two_density_fn(const std::function<double(double)>& zhat,
                            double alpha, double S, int pts_per_unit = 64);

// Inverse-subordinator step path resolved on a geometric time grid
// s_min * ratio^k, extended until Z(s) exceeds 1: the value on
// [Z(s_{k-1}), Z(s_k)) is s_k, the grid version of inf{s : Z(s) > u}.  The
// geometric grid is what order_two_density needs -- uniform grids cannot
// resolve the range near 0, where the density integrand lives.
PiecewisePath sample_zhat_path(RngStream& g, const StableSpec& spec,
                               double s_min = 1e-8, double ratio = 1.02);

// Range of the subordinator over s in [0, t], sampled on a uniform n-point
// grid: cumulative iid increments, already sorted.
std::vector<double> subordinator_range_points(RngStream& g,
                                              const StableSpec& spec, double t,
                                              int n_grid);

// Greedy interval-cover diagnostic for a sorted point set: scan left to
// right, grow each interval while the next point stays within diameter delta
// of its left end, and charge gauge(max(diameter, delta_min)) per interval.
// An upper-bound-flavored diagnostic, not a convergent Hausdorff measure:
// quantitative claims on it are order-of-magnitude only.
double hausdorff_cover_estimate(const std::vector<double>& points,
                                const std::function<double(double)>& gauge,
                                double delta, double delta_min = 1e-12);

// Integer-set order-two density: the log average of the counting path of the
// given event times against t^alpha (exact piecewise form) or a general
// normalizer (adaptive quadrature).  Delegates to the estimators module.
LogAverageResult integer_order_two(const std::vector<double>& events,
                                   double alpha, double T);
LogAverageResult integer_order_two(const std::vector<double>& events,
                                   const std::function<double(double)>& ahat,
                                   double T, double rel_tol = 1e-9);

}  // namespace ergoflow
