#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ergoflow/paths.hpp"
#include "ergoflow/rng.hpp"
#include "ergoflow/stable.hpp"

namespace ergoflow {

// Interarrival laws on (0, infinity).  The heavy-tailed variants (index
// alpha in (0,1)) sit in the domain of attraction of the one-sided stable
// law; geometric and finite tables are the light-tailed controls.
enum class GapKind {
  pareto_continuous,  // survival 1 - F(x) = x^-alpha on [1, inf)
  pareto_integer,     // P(X > n) = (n+1)^-alpha on n = 0, 1, ...
  stable_gaps,        // X =law Z(1) for a given StableSpec
  geometric,          // P(X = k) = q (1-q)^(k-1), k = 1, 2, ...
  table,              // finite pmf p[k-1] = P(X = k), k = 1..K
};

struct GapLaw {
  GapKind kind = GapKind::pareto_continuous;
  double alpha = 0.0;     // pareto variants
  StableSpec spec{0, 0};  // stable_gaps
  double q = 0.0;         // geometric
  std::vector<double> p;  // table

  static GapLaw pareto_cont(double alpha);
  static GapLaw pareto_int(double alpha);
  static GapLaw stable(const StableSpec& spec);
  static GapLaw geometric_law(double q);
  static GapLaw table_law(std::vector<double> p);
};

// quantile map used by the inverse-CDF variants (everything except
// stable_gaps, which goes through Kanter's representation instead)
double gap_quantile(const GapLaw& law, double u);
double sample_gap(RngStream& g, const GapLaw& law);

// cdf F(x) = P(X <= x), available in closed form for every non-stable variant
double gap_cdf(const GapLaw& law, double x);

// mean gap, or +inf when the law has no first moment
double gap_mean(const GapLaw& law);

// The three normalizing functions attached to a law in the domain of
// attraction of index alpha:
//   ahat(t) = 1/(1 - F(t))  (regularly varying of index alpha),
//   a = exact inverse of ahat (index 1/alpha), and h = a^alpha.
// Laws outside the attraction domain (geometric, table) throw
// std::domain_error with a diagnostic.
struct NormalizerTriple {
  double alpha;
  std::function<double(double)> ahat;
  std::function<double(double)> a;
  std::function<double(double)> h;
};
NormalizerTriple normalizers(const GapLaw& law);

// simulation horizon: run until time T, or until n events have occurred
struct Horizon {
  enum class Kind { by_time, by_events } kind;
  double value;
  static Horizon by_time(double t) { return {Kind::by_time, t}; }
  static Horizon by_events(long n) {
    return {Kind::by_events, static_cast<double>(n)};
  }
};

// Counting path built from explicit gaps: unit jump at each partial sum
// S_1 < S_2 < ..., value k on [S_k, S_k+1), anchored at N(0) = 0.  With
// negative gaps present the path extends to the left with value -k on
// [S_-k, S_-k+1), i.e. N(t) = -#events in (t, 0] for t < 0.
PiecewisePath counting_path(const std::vector<double>& gaps, double t_hi,
                            const std::vector<double>& negative_gaps = {});

// Renewal counting path N on [0, T] (or [-T', T] two-sided).  Events are
// counted at their own time: gaps (2,3) give N = 0 on [0,2), 1 on [2,5),
// 2 at 5.  The two-sided variant draws the negative-time gap stream from an
// rng substream seeded off `g` so the two sides are independent.
PiecewisePath simulate_renewal(RngStream& g, const GapLaw& law,
                               Horizon horizon, bool two_sided = false);

// jump times of a counting path (strictly positive ones, in order)
std::vector<double> event_times(const PiecewisePath& counting);

struct McEstimate {
  double mean;
  double se;
};

// Monte Carlo estimate of the return sequence a_n = E[N(n)], one independent
// path per index drawn from stream(master_seed, path)
McEstimate return_sequence_mc(const GapLaw& law, double n, int n_paths,
                              std::uint64_t master_seed);

// Coupled realization of the inverse-process approximant and its renewal
// counting path on one probability space: a subordinator Z is sampled on the
// fine grid {j/m}, the gaps are its unit-time increments (so S_n = Z(n)
// exactly and the gaps are iid stable), zhat is the piecewise-linear
// interpolant of the inverse through the fine-grid knots, and nbar is the
// counting path of the S_n.  Both share the window [0, S_n].
struct CoupledPair {
  PiecewisePath zhat;
  PiecewisePath nbar;
};
CoupledPair coupled_pair(RngStream& g, const StableSpec& spec, long n_events,
                         int steps_per_unit);

}  // namespace ergoflow
