#include "ergoflow/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ergoflow {

namespace {

std::vector<double> jump_times(const PiecewisePath& x) {
  const std::vector<double>& t = x.breakpoints();
  const std::vector<double>& v = x.values();
  std::vector<double> out;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (v[i] != v[i - 1]) out.push_back(t[i]);
  return out;
}

// Lebesgue measure of (a, b] intersected with union_J [J - theta, J]
double union_measure(const std::vector<double>& jumps, double a, double b,
                     double theta) {
  double covered = a;
  double total = 0.0;
  for (double j : jumps) {
    if (j - theta >= b) break;
    double lo = std::max(j - theta, covered);
    double hi = std::min(j, b);
    if (hi > lo) {
      total += hi - lo;
      covered = hi;
    }
  }
  return total;
}

long integer_time(double t) {
  double n = std::round(t);
  if (std::abs(t - n) > 1e-9)
    throw std::domain_error("cocycle: integer-time cocycle evaluated off the grid");
  return static_cast<long>(n);
}

}  // namespace

PiecewisePath FlowAction::act(const PiecewisePath& x, double t) const {
  if (kind == Kind::increment) return increment_flow(x, t);
  return scaling_flow(x, t, beta);
}

Cocycle counting_cocycle() {
  return {"counting", {}, TimeDomain::real_time,
          [](const PiecewisePath& x, double t) { return x(t) - x(0.0); }};
}

Cocycle coordinate_cocycle() {
  return {"coordinate", {}, TimeDomain::real_time,
          [](const PiecewisePath& x, double t) { return x(t); }};
}

Cocycle time_cocycle() {
  return {"time", {}, TimeDomain::real_time,
          [](const PiecewisePath&, double t) { return t; }};
}

Cocycle generated_cocycle(double theta) {
  if (!(theta > 0.0))
    throw std::invalid_argument("generated_cocycle: theta must be positive");
  return {"generated", {}, TimeDomain::real_time,
          [theta](const PiecewisePath& x, double t) {
            double a = std::min(0.0, t), b = std::max(0.0, t);
            Window w = x.window();
            if (a < w.lo || b > w.hi)
              throw std::domain_error("generated cocycle: time outside window");
            double m = union_measure(jump_times(x), a, b, theta);
            return t >= 0.0 ? m : -m;
          }};
}

Cocycle discrete_generated_cocycle(
    std::function<double(const PiecewisePath&)> phi) {
  return {"discrete-generated", {}, TimeDomain::integer_time,
          [phi](const PiecewisePath& x, double t) {
            long n = integer_time(t);
            double s = 0.0;
            for (long i = 0; i < n; ++i) s += phi(increment_flow(x, static_cast<double>(i)));
            for (long i = -1; i >= n; --i) s -= phi(increment_flow(x, static_cast<double>(i)));
            return s;
          }};
}

Cocycle hahn_plus_cocycle() {
  return {"hahn-plus", {}, TimeDomain::real_time,
          [](const PiecewisePath& x, double t) {
            PiecewisePath p = hahn_decompose(x).first;
            return p(t) - p(0.0);
          }};
}

Cocycle hahn_minus_cocycle() {
  return {"hahn-minus", {}, TimeDomain::real_time,
          [](const PiecewisePath& x, double t) {
            PiecewisePath m = hahn_decompose(x).second;
            return m(t) - m(0.0);
          }};
}

double verify_cocycle_law(const Cocycle& c, const std::vector<PiecewisePath>& xs,
                          const std::vector<std::pair<double, double>>& st) {
  double worst = 0.0;
  for (const PiecewisePath& x : xs) {
    worst = std::max(worst, std::abs(c.eval(x, 0.0)));
    for (auto [s, t] : st) {
      PiecewisePath y = c.flow.act(x, s);
      double r = std::abs(c.eval(x, s + t) - c.eval(x, s) - c.eval(y, t));
      worst = std::max(worst, r);
    }
  }
  return worst;
}

CrossSection renewal_section(const GapLaw& law, double margin) {
  if (!(margin > 0.0))
    throw std::invalid_argument("renewal_section: margin must be positive");
  return {[law, margin](RngStream& g) {
            std::vector<double> gaps{sample_gap(g, law)};
            double horizon = gaps[0] + margin;
            double s = gaps[0];
            while (true) {
              double x = sample_gap(g, law);
              if (s + x > horizon) break;
              s += x;
              gaps.push_back(x);
            }
            return counting_path(gaps, horizon);
          },
          [](const PiecewisePath& x) {
            std::vector<double> ev = event_times(x);
            if (ev.empty())
              throw std::domain_error("renewal_section: no return in window");
            return ev.front();
          }};
}

CrossSection index_section(const GapLaw& law, long n_gaps) {
  if (n_gaps < 1) throw std::invalid_argument("index_section: need n_gaps >= 1");
  return {[law, n_gaps](RngStream& g) {
            std::vector<double> t(n_gaps + 1), v(n_gaps + 1);
            double s = 0.0;
            for (long k = 1; k <= n_gaps; ++k) {
              s += sample_gap(g, law);
              t[k] = static_cast<double>(k);
              v[k] = s;
            }
            return PiecewisePath(PathKind::step, std::move(t), std::move(v));
          },
          [](const PiecewisePath&) { return 1.0; }};
}

IntegralEstimate integral_cross_section(const Cocycle& phi,
                                        const CrossSection& section,
                                        int n_samples, std::uint64_t seed) {
  if (n_samples < 1)
    throw std::invalid_argument("integral_cross_section: n_samples >= 1");
  std::vector<double> vals(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    RngStream g(seed, static_cast<std::uint64_t>(i));
    PiecewisePath x = section.sample(g);
    vals[i] = phi.eval(x, section.return_time(x));
  }

  IntegralEstimate out{0.0, 0.0, false, {}};
  double sum = 0.0, abs_sum = 0.0, max_abs = 0.0;
  long next_mark = std::max(1, n_samples / 64);
  for (int i = 0; i < n_samples; ++i) {
    sum += vals[i];
    abs_sum += std::abs(vals[i]);
    max_abs = std::max(max_abs, std::abs(vals[i]));
    if (i + 1 == next_mark || i + 1 == n_samples) {
      out.growth.emplace_back(i + 1, sum / (i + 1));
      next_mark = std::min<long>(n_samples, next_mark * 4);
    }
  }
  out.mean = sum / n_samples;
  if (n_samples > 1) {
    double ss = 0.0;
    for (double v : vals) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (n_samples - 1) / n_samples);
  }
  // Two signatures of an infinite integral, either of which trips the flag:
  // a single summand carrying a fifth of the total absolute mass, or the
  // prefix mean still climbing by more than x4 across the checkpoint range
  // (a convergent estimate flattens; an infinite one grows polynomially).
  bool dominated = n_samples >= 100 && abs_sum > 0.0 && max_abs / abs_sum > 0.2;
  bool climbing = false;
  if (out.growth.size() >= 3) {
    auto [n0, m0] = out.growth.front();
    auto [n1, m1] = out.growth.back();
    climbing = n1 >= 16 * n0 && m0 != 0.0 && (m0 > 0.0) == (m1 > 0.0) &&
               std::abs(m1) > 4.0 * std::abs(m0);
  }
  out.diverged = dominated || climbing;
  return out;
}

McEstimate integral_flow_average(const Cocycle& phi,
                                 const std::function<PiecewisePath(RngStream&)>& sampler,
                                 double t, int n_samples, std::uint64_t seed) {
  if (t == 0.0) throw std::invalid_argument("integral_flow_average: t != 0");
  if (n_samples < 1)
    throw std::invalid_argument("integral_flow_average: n_samples >= 1");
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    RngStream g(seed, static_cast<std::uint64_t>(i));
    PiecewisePath x = sampler(g);
    double v = phi.eval(x, t) / t;
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / n_samples;
  double se = std::numeric_limits<double>::quiet_NaN();
  if (n_samples > 1) {
    double var = (sumsq - n_samples * mean * mean) / (n_samples - 1);
    se = std::sqrt(std::max(var, 0.0) / n_samples);
  }
  return {mean, se};
}

McEstimate suspension_flow_average(const Cocycle& phi, const GapLaw& law,
                                   double t, int n_samples, std::uint64_t seed) {
  if (!(t > 0.0))
    throw std::invalid_argument("suspension_flow_average: t must be positive");
  if (n_samples < 1)
    throw std::invalid_argument("suspension_flow_average: n_samples >= 1");
  const double node = 0.5 / std::sqrt(3.0);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    RngStream g(seed, static_cast<std::uint64_t>(i));
    double first = sample_gap(g, law);
    std::vector<double> gaps{first};
    double s = first;
    while (s <= first + t) {
      double x = sample_gap(g, law);
      s += x;
      gaps.push_back(x);
    }
    PiecewisePath x = counting_path(gaps, s);

    // structure cells of u -> Phi(eta_u x, t) on [0, r): breakpoints at the
    // events S_k and their pullbacks S_k - t
    std::vector<double> cuts{0.0, first};
    for (double ev : event_times(x)) {
      if (ev > 0.0 && ev < first) cuts.push_back(ev);
      double back = ev - t;
      if (back > 0.0 && back < first) cuts.push_back(back);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      double w = cuts[k + 1] - cuts[k];
      double mid = 0.5 * (cuts[k] + cuts[k + 1]);
      for (double off : {-node * w, node * w})
        integral += 0.5 * w * phi.eval(increment_flow(x, mid + off), t);
    }
    double v = integral / t;
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / n_samples;
  double se = std::numeric_limits<double>::quiet_NaN();
  if (n_samples > 1) {
    double var = (sumsq - n_samples * mean * mean) / (n_samples - 1);
    se = std::sqrt(std::max(var, 0.0) / n_samples);
  }
  return {mean, se};
}

double birkhoff_cocycle(const Cocycle& phi, const PiecewisePath& orbit, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("birkhoff_cocycle: T must be positive");
  return phi.eval(orbit, T) / T;
}

std::optional<double> hopf_ratio(const Cocycle& phi, const Cocycle& psi,
                                 const PiecewisePath& orbit, double T) {
  double denom = psi.eval(orbit, T);
  if (denom == 0.0) return std::nullopt;
  return phi.eval(orbit, T) / denom;
}

}  // namespace ergoflow
