#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace ergoflow {

enum class PathKind { step, linear };

// closed time window [lo, hi]
struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

// Cadlag piecewise path on a finite window [t.front(), t.back()].
//
//   step:   value v[i] on [t[i], t[i+1]), and v[n-1] at the right endpoint
//   linear: continuous, interpolating the knots (t[i], v[i])
//
// Breakpoints must be strictly increasing and everything finite.  Values may
// be any bounded-variation sequence; the order-theoretic operations
// (generalized inverse, graphs) additionally require monotonicity and throw
// std::domain_error when it fails.
class PiecewisePath {
 public:
  PiecewisePath(PathKind kind, std::vector<double> t, std::vector<double> v);

  PathKind kind() const { return kind_; }
  const std::vector<double>& breakpoints() const { return t_; }
  const std::vector<double>& values() const { return v_; }
  std::size_t size() const { return t_.size(); }
  Window window() const { return {t_.front(), t_.back()}; }

  // cadlag evaluation; throws std::domain_error outside the window
  double operator()(double x) const;
  // left limit at x (equals the value except at step-path jump points)
  double left_limit(double x) const;

  bool is_nondecreasing() const;

  // restriction to [w.lo, w.hi] (sub-window of the current window)
  PiecewisePath restrict(Window w) const;

 private:
  PathKind kind_;
  std::vector<double> t_;
  std::vector<double> v_;
};

// f^(s) = inf{ x : f(x) > s }, the right-continuous generalized inverse,
// represented on the window [f(t_min), last attained level].  Step paths
// invert to step paths; strictly increasing linear paths invert exactly by
// swapping knots.  Throws std::domain_error for constant paths (empty
// inverse window) and for non-monotone input.
PiecewisePath generalized_inverse(const PiecewisePath& p);

// scaling flow of index beta:  (tau_t f)(x) = f(e^t x) / e^(beta t).
// Breakpoints contract by e^-t, values by e^-(beta t).
PiecewisePath scaling_flow(const PiecewisePath& p, double t, double beta);

// increment flow:  (eta_s f)(x) = f(x + s) - f(s), on the shifted window.
// Requires s in [t_min, t_max).
PiecewisePath increment_flow(const PiecewisePath& p, double s);

// conjugate increment flow on inverse paths:  eta^_s = inv . eta_s . inv.
// Requires a nondecreasing, non-constant path and s inside its value range.
PiecewisePath dual_increment_flow(const PiecewisePath& p, double s);

// first time the path strictly exceeds its initial value; domain_error if
// it never does
double first_increase(const PiecewisePath& p);

// exact uniform distance over the closed window w (must be covered by both
// paths); checks left limits as well as values at every breakpoint
double sup_distance(const PiecewisePath& a, const PiecewisePath& b, Window w);
// same, over the intersection of the two windows
double sup_distance(const PiecewisePath& a, const PiecewisePath& b);

// uniform distance sampled strictly inside the cells of the merged
// breakpoint partition.  Robust companion to sup_distance for comparing two
// compositions of flows: the same jump can land on float-adjacent
// breakpoints in the two operand orders, and the exact sup would then report
// the full jump height across a one-ulp sliver.
double essential_sup_distance(const PiecewisePath& a, const PiecewisePath& b,
                              Window w);

// residual of the scaling/increment commutation relations, measured with
// essential_sup_distance on the natural common windows:
//   primal (index 1/alpha):  tau_t . eta_s        vs  eta_{e^-t s} . tau_t
//   inverse side (index alpha): tau^_t . eta^_s   vs  eta^_{e^-(alpha t) s} . tau^_t
// p must be nondecreasing and non-constant, s a time inside its window whose
// value f(s) keeps the conjugated shifts inside range.  Returns the larger
// of the two residuals.
double commutation_check(const PiecewisePath& p, double s, double t,
                         double alpha);

// Jordan/Hahn decomposition: p(x) = p(t_min) + plus(x) - minus(x) with both
// parts nondecreasing, starting at 0, and of minimal total variation.
std::pair<PiecewisePath, PiecewisePath> hahn_decompose(const PiecewisePath& p);

// one maximal segment of a completed graph; endpoints ordered so that
// (x0,y0) <= (x1,y1) coordinatewise
struct GraphSegment {
  double x0, y0, x1, y1;
};

// completed graph of a monotone path: horizontal/diagonal pieces plus the
// vertical segments filling each jump
std::vector<GraphSegment> completed_graph(const PiecewisePath& p);

// reflect a graph across the diagonal (swap coordinates)
std::vector<GraphSegment> dual_graph(const std::vector<GraphSegment>& segs);

// Compare two monotone graphs as point sets.  Both are clipped to the
// intersection of their bounding boxes first: that is where finite-window
// edge artifacts live (e.g. the dual of a trailing flat spot), and the
// curves are only meant to agree there.  Equality is up to tol after
// canonicalizing each curve to its corner polyline.
bool graphs_equal(const std::vector<GraphSegment>& a,
                  const std::vector<GraphSegment>& b, double tol);

}  // namespace ergoflow
