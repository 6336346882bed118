#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ergoflow/paths.hpp"
#include "ergoflow/renewal.hpp"
#include "ergoflow/rng.hpp"
#include "ergoflow/stable.hpp"

namespace ergoflow {

// Log-average of a path f against a normalizer over [1, T],
//   (1/log T) integral_1^T f(t)/ahat(t) dt/t,
// with the running value recorded at dyadic checkpoints T_j = 2^j (and at T
// itself): the limit sets in at 1/log T speed, so convergence must be judged
// from the trend across checkpoints, not from any single horizon.
struct LogAverageResult {
  double value;
  double T;
  std::vector<std::pair<double, double>> blocks;  // (T_j, value up to T_j)
};

// Power normalizer ahat(t) = t^alpha: each constancy interval of the step
// path has the closed-form contribution k (lo^-alpha - hi^-alpha)/alpha, so
// the result is exact -- no quadrature enters at all.
LogAverageResult log_average_power(const PiecewisePath& N, double alpha,
                                   double T);

// General normalizer: adaptive Simpson quadrature per constancy/linearity
// interval of f, refined until the stated relative tolerance holds.  Agrees
// with log_average_power to 1e-12 when ahat(t) = t^alpha.
LogAverageResult log_average_general(const PiecewisePath& f,
                                     const std::function<double(double)>& ahat,
                                     double T, double rel_tol);

// Cesaro average over log-time of the uniform distance between two scaled
// paths,
//   (1/T) integral_0^T e^{-alpha t} sup_{[0, e^t]} |zhat - g| dt:
// the scaling flow contracts their difference on average when the paths lie
// on the same asymptotic orbit.  The sup is exact per sample point (the
// difference is piecewise linear between merged breakpoints); the dt
// integral is a trapezoid rule on pts_per_unit samples per unit log-time.
// Both windows must cover [0, e^T].
double cesaro_orbit_distance(const PiecewisePath& zhat, const PiecewisePath& g,
                             double alpha, double T, int pts_per_unit = 64);

// Cesaro average of the scaled increment-shift discrepancy at the point 1,
//   (1/T) integral_0^T e^{-alpha t} |zhat(e^t) - zhat(e^t + r) + zhat(r)| dt;
// the window must cover [0, e^T + r].  The _fn overload evaluates a closed
// form of zhat instead of a simulated path (deterministic oracle); the
// renewal variant scales a counting path by its own normalizer,
//   (1/T) integral_0^T |N(e^t) - N(e^t + r) + N(r)| / ahat(e^t) dt.
double cesaro_horocycle_check(const PiecewisePath& zhat, double r, double alpha,
                              double T, int pts_per_unit = 64);
double cesaro_horocycle_check_fn(const std::function<double(double)>& zhat,
                                 double r, double alpha, double T,
                                 int pts_per_unit = 64);
double cesaro_horocycle_renewal(const PiecewisePath& nbar, double r,
                                const std::function<double(double)>& ahat,
                                double T, int pts_per_unit = 64);

// Two-sided Monte Carlo check of the normalized partial-sum moments: at each
// k the left side estimates E[(a(k)/S_k)^p] from fresh gap samples and the
// right side estimates E[Z(1)^-p] from the matched stable law.
struct MomentRow {
  double k;
  McEstimate lhs;
  McEstimate rhs;
};
std::vector<MomentRow> moment_convergence(const GapLaw& law,
                                          const StableSpec& spec,
                                          const std::vector<double>& k_list,
                                          double p, int n_samples,
                                          std::uint64_t seed);

// Ensemble runner: per-path stream (master_seed, path_index), so the values
// are a pure function of the seed no matter how many workers execute the
// paths or in what order they finish.
struct EnsembleResult {
  std::vector<double> values;
  double mean;
  double se;
  bool se_defined;  // false for a single path
  double target;    // NaN when none declared
  double z;         // (mean - target)/se when both are available, else NaN
};
EnsembleResult run_ensemble(const std::function<double(RngStream&)>& fn,
                            int n_paths, std::uint64_t master_seed, int workers,
                            double target = std::nan(""));

}  // namespace ergoflow
