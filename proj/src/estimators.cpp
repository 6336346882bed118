#include "ergoflow/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

namespace ergoflow {

namespace {

void check_log_average_domain(const PiecewisePath& f, double T, const char* who) {
  if (!(T > 1.0))
    throw std::domain_error(std::string(who) + ": T > 1 required");
  if (f.window().lo > 1.0 || f.window().hi < T)
    throw std::domain_error(std::string(who) +
                            ": path window must cover [1, T]");
}

// Walk the constancy/linearity intervals of f clipped to [1, T], splitting at
// dyadic checkpoints 2, 4, 8, ...; `piece` integrates one sub-interval and
// checkpoints collect the running log-average.
template <typename PieceIntegral>
LogAverageResult log_average_walk(const PiecewisePath& f, double T,
                                  PieceIntegral&& piece) {
  const std::vector<double>& t = f.breakpoints();
  LogAverageResult out{0.0, T, {}};
  double acc = 0.0;
  double dyadic = 2.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    double lo = std::max(t[i], 1.0);
    double hi = std::min(t[i + 1], T);
    if (!(hi > lo)) continue;
    while (dyadic < hi) {
      if (dyadic > lo) {
        acc += piece(i, lo, dyadic);
        lo = dyadic;
      }
      out.blocks.emplace_back(dyadic, acc / std::log(dyadic));
      dyadic *= 2.0;
    }
    acc += piece(i, lo, hi);
  }
  out.blocks.emplace_back(T, acc / std::log(T));
  out.value = acc / std::log(T);
  return out;
}

// Adaptive Simpson with Richardson acceptance against a tolerance relative
// to the subinterval's own mass, so the criterion stays achievable at every
// depth as long as rel_tol sits above machine precision -- and throws with a
// diagnostic when it does not.
[[noreturn]] void simpson_give_up(double rel_tol, double t_near) {
  std::ostringstream msg;
  msg << "log_average_general: relative tolerance " << rel_tol
      << " not achieved near t = " << t_near << " within the depth budget";
  throw std::runtime_error(msg.str());
}

template <typename G>
double simpson_recurse(const G& g, double rel_tol, double a, double m,
                       double b, double fa, double fm, double fb, double whole,
                       int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = g(lm), frm = g(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  double tol = rel_tol * std::max(std::abs(left) + std::abs(right), 1e-300);
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) simpson_give_up(rel_tol, std::exp(m));
  return simpson_recurse(g, rel_tol, a, lm, m, fa, flm, fm, left, depth - 1) +
         simpson_recurse(g, rel_tol, m, rm, b, fm, frm, fb, right, depth - 1);
}

template <typename G>
double simpson_block(const G& g, double rel_tol, double a, double b) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = g(a), fm = g(m), fb = g(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(g, rel_tol, a, m, b, fa, fm, fb, whole, 36);
}

// (1/T) integral_0^T integrand(t) dt by the trapezoid rule on a uniform
// log-time grid
double cesaro_trapezoid(const std::function<double(double)>& integrand,
                        double T, int pts_per_unit) {
  if (!(T > 0.0)) throw std::invalid_argument("cesaro average: T > 0 required");
  if (pts_per_unit < 1)
    throw std::invalid_argument("cesaro average: pts_per_unit >= 1");
  long n = std::max<long>(2, std::lround(std::ceil(T * pts_per_unit)));
  double h = T / static_cast<double>(n);
  double sum = 0.5 * (integrand(0.0) + integrand(T));
  for (long i = 1; i < n; ++i) sum += integrand(h * static_cast<double>(i));
  return sum * h / T;
}

}  // namespace

LogAverageResult log_average_power(const PiecewisePath& N, double alpha,
                                   double T) {
  if (N.kind() != PathKind::step)
    throw std::invalid_argument("log_average_power: step path required");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("log_average_power: alpha in (0,1)");
  check_log_average_domain(N, T, "log_average_power");
  const std::vector<double>& v = N.values();
  return log_average_walk(N, T, [&](std::size_t i, double lo, double hi) {
    // integral of v_i * t^(-alpha-1) over [lo, hi], antiderivative in hand
    return v[i] * (std::pow(lo, -alpha) - std::pow(hi, -alpha)) / alpha;
  });
}

LogAverageResult log_average_general(const PiecewisePath& f,
                                     const std::function<double(double)>& ahat,
                                     double T, double rel_tol) {
  if (!(rel_tol > 0.0))
    throw std::invalid_argument("log_average_general: rel_tol > 0");
  check_log_average_domain(f, T, "log_average_general");
  const std::vector<double>& bp = f.breakpoints();
  const std::vector<double>& v = f.values();
  const bool step = f.kind() == PathKind::step;
  return log_average_walk(f, T, [&](std::size_t i, double lo, double hi) {
    // Block contribution in log time: with u = log t the 1/t Jacobian
    // cancels and integral f/(ahat t) dt becomes integral f(e^u)/ahat(e^u) du
    // on an interval of width log(hi/lo) -- tame even when the block spans
    // orders of magnitude.  f is read from segment i alone; the cadlag
    // evaluator would bleed the next block's value into the right endpoint.
    auto seg_value = [&](double t) {
      if (step) return v[i];
      double w = (t - bp[i]) / (bp[i + 1] - bp[i]);
      return v[i] + w * (v[i + 1] - v[i]);
    };
    auto gu = [&](double u) {
      double t = std::exp(u);
      return seg_value(t) / ahat(t);
    };
    return simpson_block(gu, rel_tol, std::log(lo), std::log(hi));
  });
}

double cesaro_orbit_distance(const PiecewisePath& zhat, const PiecewisePath& g,
                             double alpha, double T, int pts_per_unit) {
  if (!(T > 0.0))
    throw std::invalid_argument("cesaro_orbit_distance: T > 0 required");
  const double U = std::exp(T);
  if (zhat.window().lo > 0.0 || g.window().lo > 0.0 || zhat.window().hi < U ||
      g.window().hi < U)
    throw std::domain_error(
        "cesaro_orbit_distance: both windows must cover [0, e^T]");

  // merged breakpoints of the difference restricted to [0, U]; |zhat - g| is
  // piecewise linear and continuous between consecutive ones, so segment
  // suprema live at segment ends (left limits at the right end)
  std::vector<double> cuts{0.0, U};
  for (double b : zhat.breakpoints())
    if (b > 0.0 && b < U) cuts.push_back(b);
  for (double b : g.breakpoints())
    if (b > 0.0 && b < U) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const std::size_t nseg = cuts.size() - 1;
  auto diff = [&](double u) { return std::abs(zhat(u) - g(u)); };
  auto diff_left = [&](double u) {
    return std::abs(zhat.left_limit(u) - g.left_limit(u));
  };
  // prefix[k] = sup over [0, cuts[k]] including the left limit at cuts[k]
  std::vector<double> prefix(nseg + 1);
  prefix[0] = diff(0.0);
  for (std::size_t k = 1; k <= nseg; ++k)
    prefix[k] = std::max({prefix[k - 1], diff(cuts[k - 1]), diff_left(cuts[k])});

  auto sup_to = [&](double u) {
    // locate the segment containing u and combine full segments before it
    // with the partial segment [cuts[j], u]
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(cuts.begin(), cuts.end(), u) - cuts.begin());
    if (j == 0) return diff(u);
    --j;  // cuts[j] <= u
    if (j >= nseg) return prefix[nseg];  // u == U
    double partial = std::max(diff(cuts[j]), diff(u));
    return std::max(prefix[j], partial);
  };

  return cesaro_trapezoid(
      [&](double t) { return std::exp(-alpha * t) * sup_to(std::exp(t)); }, T,
      pts_per_unit);
}

double cesaro_horocycle_check(const PiecewisePath& zhat, double r, double alpha,
                              double T, int pts_per_unit) {
  if (!(r >= 0.0))
    throw std::invalid_argument("cesaro_horocycle_check: r >= 0 required");
  if (!(T > 0.0))
    throw std::invalid_argument("cesaro_horocycle_check: T > 0 required");
  if (zhat.window().lo > 0.0 || zhat.window().hi < std::exp(T) + r)
    throw std::domain_error(
        "cesaro_horocycle_check: window must cover [0, e^T + r]");
  return cesaro_trapezoid(
      [&](double t) {
        double u = std::exp(t);
        return std::exp(-alpha * t) *
               std::abs(zhat(u) - zhat(u + r) + zhat(r));
      },
      T, pts_per_unit);
}

double cesaro_horocycle_check_fn(const std::function<double(double)>& zhat,
                                 double r, double alpha, double T,
                                 int pts_per_unit) {
  if (!(r >= 0.0))
    throw std::invalid_argument("cesaro_horocycle_check_fn: r >= 0 required");
  return cesaro_trapezoid(
      [&](double t) {
        double u = std::exp(t);
        return std::exp(-alpha * t) *
               std::abs(zhat(u) - zhat(u + r) + zhat(r));
      },
      T, pts_per_unit);
}

double cesaro_horocycle_renewal(const PiecewisePath& nbar, double r,
                                const std::function<double(double)>& ahat,
                                double T, int pts_per_unit) {
  if (!(r >= 0.0))
    throw std::invalid_argument("cesaro_horocycle_renewal: r >= 0 required");
  if (!(T > 0.0))
    throw std::invalid_argument("cesaro_horocycle_renewal: T > 0 required");
  if (nbar.window().lo > 0.0 || nbar.window().hi < std::exp(T) + r)
    throw std::domain_error(
        "cesaro_horocycle_renewal: window must cover [0, e^T + r]");
  return cesaro_trapezoid(
      [&](double t) {
        double u = std::exp(t);
        return std::abs(nbar(u) - nbar(u + r) + nbar(r)) / ahat(u);
      },
      T, pts_per_unit);
}

std::vector<MomentRow> moment_convergence(const GapLaw& law,
                                          const StableSpec& spec,
                                          const std::vector<double>& k_list,
                                          double p, int n_samples,
                                          std::uint64_t seed) {
  if (!(p >= 0.0))
    throw std::invalid_argument("moment_convergence: p >= 0 required");
  if (n_samples < 2)
    throw std::invalid_argument("moment_convergence: n_samples >= 2");
  NormalizerTriple norm = normalizers(law);

  auto summarize = [n_samples](double sum, double sumsq) {
    double mean = sum / n_samples;
    double var = std::max(0.0, (sumsq - sum * mean) / (n_samples - 1));
    return McEstimate{mean, std::sqrt(var / n_samples)};
  };

  // right side E[Z(1)^-p], shared by every row
  double rsum = 0.0, rsumsq = 0.0;
  {
    RngStream g(seed, 0);
    for (int i = 0; i < n_samples; ++i) {
      double v = std::pow(sample_stable(g, spec), -p);
      rsum += v;
      rsumsq += v * v;
    }
  }
  McEstimate rhs = summarize(rsum, rsumsq);

  std::vector<MomentRow> out;
  out.reserve(k_list.size());
  for (std::size_t row = 0; row < k_list.size(); ++row) {
    double k = k_list[row];
    long steps = std::lround(k);
    if (steps < 1)
      throw std::invalid_argument("moment_convergence: k >= 1 required");
    double ak = norm.a(k);
    RngStream g(seed, row + 1);
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n_samples; ++i) {
      double s = 0.0;
      for (long j = 0; j < steps; ++j) s += sample_gap(g, law);
      double v = std::pow(ak / s, p);
      sum += v;
      sumsq += v * v;
    }
    out.push_back({k, summarize(sum, sumsq), rhs});
  }
  return out;
}

EnsembleResult run_ensemble(const std::function<double(RngStream&)>& fn,
                            int n_paths, std::uint64_t master_seed, int workers,
                            double target) {
  if (n_paths < 1) throw std::invalid_argument("run_ensemble: n_paths >= 1");
  if (workers < 1) throw std::invalid_argument("run_ensemble: workers >= 1");
  EnsembleResult out;
  out.values.resize(n_paths);

  // work-stealing by path index: whichever worker draws index i, the stream
  // is (master_seed, i), so the filled slots are schedule-independent
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n_paths) return;
      RngStream g(master_seed, static_cast<std::uint64_t>(i));
      out.values[i] = fn(g);
    }
  };
  int spawn = std::min(workers, n_paths);
  if (spawn <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(spawn);
    for (int w = 0; w < spawn; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }

  double sum = 0.0;
  for (double v : out.values) sum += v;
  out.mean = sum / n_paths;
  out.se_defined = n_paths > 1;
  if (out.se_defined) {
    double ss = 0.0;
    for (double v : out.values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (n_paths - 1) / n_paths);
  } else {
    out.se = std::nan("");
  }
  out.target = target;
  out.z = (std::isfinite(target) && out.se_defined && out.se > 0.0)
              ? (out.mean - target) / out.se
              : std::nan("");
  return out;
}

}  // namespace ergoflow
