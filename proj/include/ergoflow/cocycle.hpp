#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ergoflow/paths.hpp"
#include "ergoflow/renewal.hpp"
#include "ergoflow/rng.hpp"

namespace ergoflow {

// the group action a cocycle lives over
struct FlowAction {
  enum class Kind { increment, scaling } kind = Kind::increment;
  double beta = 1.0;  // scaling index; unused for the increment flow
  PiecewisePath act(const PiecewisePath& x, double t) const;
};

enum class TimeDomain { real_time, integer_time };

// Additive cocycle over a flow on path space:
//   Phi(x, t+s) = Phi(x, s) + Phi(flow_s x, t),   Phi(x, 0) = 0.
// Orbit points are concrete simulated paths; the flow field names the action
// the law is checked against.
struct Cocycle {
  std::string name;
  FlowAction flow;
  TimeDomain domain = TimeDomain::real_time;
  std::function<double(const PiecewisePath&, double)> eval;
};

// Phi(x, t) = x(t) - x(0): counts events of a counting path in (0, t]
// (and -#events in (t, 0] for t < 0); exact integer arithmetic there.
Cocycle counting_cocycle();

// Phi(x, t) = x(t): the coordinate evaluation, a cocycle on paths anchored
// at x(0) = 0 (the law's Phi(x,0) = 0 clause fails otherwise)
Cocycle coordinate_cocycle();

// Phi(x, t) = t: generated by the constant observable 1
Cocycle time_cocycle();

// Generated by the indicator "next jump within theta": Phi(x, t) is the
// Lebesgue measure of (0, t] intersected with union_J [J - theta, J] over
// the jump times J of x, computed exactly (signed for t < 0).
Cocycle generated_cocycle(double theta);

// Discrete-time cocycle over the unit shift: Psi(x, n) = sum_{i<n} phi applied
// to the i-shifted path. Evaluation off the integer grid throws.
Cocycle discrete_generated_cocycle(std::function<double(const PiecewisePath&)> phi);

// The nonnegative parts of the coordinate cocycle on bounded-variation step
// paths, via the minimal Hahn decomposition of t -> x(t)
Cocycle hahn_plus_cocycle();
Cocycle hahn_minus_cocycle();

// max over samples and (s,t) pairs of the law residual
//   |Phi(x, s+t) - Phi(x, s) - Phi(flow_s x, t)|, including |Phi(x, 0)|
double verify_cocycle_law(const Cocycle& c, const std::vector<PiecewisePath>& xs,
                          const std::vector<std::pair<double, double>>& st);

// A cross-section of the flow: a sampler of section points (paths anchored
// at a section visit) together with the first-return time function.
struct CrossSection {
  std::function<PiecewisePath(RngStream&)> sample;
  std::function<double(const PiecewisePath&)> return_time;
};

// Renewal section: counting paths with an event at time 0; the return time is
// the first gap. The sampled window always covers [0, first gap + margin].
CrossSection renewal_section(const GapLaw& law, double margin);

// Index section: partial-sum paths S over the integer grid (the discrete
// shift embedded at unit speed); the return time is identically 1, and the
// coordinate cocycle evaluated at it gives the first gap.
CrossSection index_section(const GapLaw& law, long n_gaps);

// Cross-section integral sum(Phi(x, r(x)))/n with a heavy-tail divergence
// diagnostic: prefix means at geometric checkpoints, and a flag tripped by
// either a dominant summand or a still-climbing prefix mean (when it trips,
// the mean is a growth snapshot, not an integral).
struct IntegralEstimate {
  double mean;
  double se;
  bool diverged;
  std::vector<std::pair<long, double>> growth;  // (n, prefix mean)
};
IntegralEstimate integral_cross_section(const Cocycle& phi,
                                        const CrossSection& section,
                                        int n_samples, std::uint64_t seed);

// Flow-average integral estimate mean(Phi(x, t))/t against a probability-law
// path sampler
McEstimate integral_flow_average(const Cocycle& phi,
                                 const std::function<PiecewisePath(RngStream&)>& sampler,
                                 double t, int n_samples, std::uint64_t seed);

// Flow-average over the (sigma-finite) suspension of the renewal section:
// draws the section point from the gap law and integrates the fiber exactly,
//   (1/t) E_B [ integral_0^r Phi(increment-shifted x, t) du ],
// with two-point Gauss quadrature per structure cell (exact for the
// piecewise-constant/linear integrands the shipped cocycles produce).
McEstimate suspension_flow_average(const Cocycle& phi, const GapLaw& law,
                                   double t, int n_samples, std::uint64_t seed);

// time average Phi(x, T)/T along one orbit
double birkhoff_cocycle(const Cocycle& phi, const PiecewisePath& orbit, double T);

// ratio Phi(x,T)/Psi(x,T); empty when the denominator has not yet moved
// (the orbit is not yet recurrent at horizon T — extend T and retry)
std::optional<double> hopf_ratio(const Cocycle& phi, const Cocycle& psi,
                                 const PiecewisePath& orbit, double T);

}  // namespace ergoflow
