#include "ergoflow/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ergoflow {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("gap law: alpha must lie in (0,1)");
}

double sum_table(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw std::invalid_argument("gap table: negative mass");
    s += x;
  }
  return s;
}

}  // namespace

GapLaw GapLaw::pareto_cont(double alpha) {
  check_alpha(alpha);
  GapLaw law;
  law.kind = GapKind::pareto_continuous;
  law.alpha = alpha;
  return law;
}

GapLaw GapLaw::pareto_int(double alpha) {
  check_alpha(alpha);
  GapLaw law;
  law.kind = GapKind::pareto_integer;
  law.alpha = alpha;
  return law;
}

GapLaw GapLaw::stable(const StableSpec& spec) {
  check_alpha(spec.alpha);
  if (!(spec.lambda > 0.0))
    throw std::invalid_argument("gap law: lambda must be positive");
  GapLaw law;
  law.kind = GapKind::stable_gaps;
  law.alpha = spec.alpha;
  law.spec = spec;
  return law;
}

GapLaw GapLaw::geometric_law(double q) {
  if (!(q > 0.0 && q <= 1.0))
    throw std::invalid_argument("gap law: q must lie in (0,1]");
  GapLaw law;
  law.kind = GapKind::geometric;
  law.q = q;
  return law;
}

GapLaw GapLaw::table_law(std::vector<double> p) {
  if (p.empty()) throw std::invalid_argument("gap table: empty");
  double s = sum_table(p);
  if (std::abs(s - 1.0) > 1e-9)
    throw std::invalid_argument("gap table: mass " + std::to_string(s) +
                                " is not 1");
  for (double& x : p) x /= s;
  GapLaw law;
  law.kind = GapKind::table;
  law.p = std::move(p);
  return law;
}

double gap_quantile(const GapLaw& law, double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("gap quantile: u must lie in (0,1)");
  switch (law.kind) {
    case GapKind::pareto_continuous:
      // survival u = x^-alpha  =>  x = u^(-1/alpha); alpha = 1/2 is the
      // workhorse case, kept in exact arithmetic
      if (law.alpha == 0.5) return 1.0 / (u * u);
      return std::pow(u, -1.0 / law.alpha);
    case GapKind::pareto_integer: {
      // X = n iff (n+1)^-alpha < u <= n^-alpha
      double x = law.alpha == 0.5 ? 1.0 / (u * u) : std::pow(u, -1.0 / law.alpha);
      return std::floor(x);
    }
    case GapKind::geometric:
      if (law.q == 1.0) return 1.0;
      return 1.0 + std::floor(std::log(u) / std::log1p(-law.q));
    case GapKind::table: {
      double acc = 0.0;
      for (std::size_t k = 0; k < law.p.size(); ++k) {
        acc += law.p[k];
        if (u <= acc) return static_cast<double>(k + 1);
      }
      return static_cast<double>(law.p.size());
    }
    case GapKind::stable_gaps:
      throw std::invalid_argument("gap quantile: stable gaps have no closed form");
  }
  throw std::invalid_argument("gap quantile: unknown kind");
}

double sample_gap(RngStream& g, const GapLaw& law) {
  if (law.kind == GapKind::stable_gaps) return sample_stable(g, law.spec);
  return gap_quantile(law, g.u01());
}

double gap_cdf(const GapLaw& law, double x) {
  switch (law.kind) {
    case GapKind::pareto_continuous:
      return x < 1.0 ? 0.0 : 1.0 - std::pow(x, -law.alpha);
    case GapKind::pareto_integer: {
      if (x < 1.0) return 0.0;
      double n = std::floor(x);
      return 1.0 - std::pow(n + 1.0, -law.alpha);
    }
    case GapKind::geometric: {
      if (x < 1.0) return 0.0;
      double n = std::floor(x);
      return 1.0 - std::pow(1.0 - law.q, n);
    }
    case GapKind::table: {
      if (x < 1.0) return 0.0;
      std::size_t n = static_cast<std::size_t>(std::floor(x));
      double acc = 0.0;
      for (std::size_t k = 0; k < law.p.size() && k + 1 <= n; ++k) acc += law.p[k];
      return acc;
    }
    case GapKind::stable_gaps:
      throw std::invalid_argument("gap cdf: stable gaps have no closed form");
  }
  throw std::invalid_argument("gap cdf: unknown kind");
}

double gap_mean(const GapLaw& law) {
  switch (law.kind) {
    case GapKind::pareto_continuous:
    case GapKind::pareto_integer:
    case GapKind::stable_gaps:
      // index alpha < 1: no first moment
      return std::numeric_limits<double>::infinity();
    case GapKind::geometric:
      return 1.0 / law.q;
    case GapKind::table: {
      double m = 0.0;
      for (std::size_t k = 0; k < law.p.size(); ++k) m += (k + 1.0) * law.p[k];
      return m;
    }
  }
  throw std::invalid_argument("gap mean: unknown kind");
}

NormalizerTriple normalizers(const GapLaw& law) {
  switch (law.kind) {
    case GapKind::pareto_continuous: {
      double al = law.alpha;
      return {al, [al](double t) { return std::pow(t, al); },
              [al](double t) { return std::pow(t, 1.0 / al); },
              [](double t) { return t; }};
    }
    case GapKind::pareto_integer: {
      double al = law.alpha;
      return {al, [al](double t) { return std::pow(t + 1.0, al); },
              [al](double t) { return std::pow(t, 1.0 / al) - 1.0; },
              [al](double t) { return std::pow(std::pow(t, 1.0 / al) - 1.0, al); }};
    }
    case GapKind::stable_gaps: {
      // tail of Z(1): 1 - F(x) ~ (lambda/Gamma(1-alpha)) x^-alpha, so the
      // canonical lambda = Gamma(1-alpha) gives ahat(t) = t^alpha on the nose
      double al = law.alpha;
      double scale = std::tgamma(1.0 - al) / law.spec.lambda;
      return {al, [al, scale](double t) { return scale * std::pow(t, al); },
              [al, scale](double t) { return std::pow(t / scale, 1.0 / al); },
              [al, scale](double t) { return t / scale; }};
    }
    case GapKind::geometric:
    case GapKind::table:
      throw std::domain_error(
          "normalizers: gap law has a finite mean and is not in the domain "
          "of attraction of a stable law with alpha < 1");
  }
  throw std::invalid_argument("normalizers: unknown kind");
}

PiecewisePath counting_path(const std::vector<double>& gaps, double t_hi,
                            const std::vector<double>& negative_gaps) {
  std::vector<double> t, v;
  t.reserve(gaps.size() + negative_gaps.size() + 2);
  v.reserve(t.capacity());

  double s = 0.0;
  std::vector<double> neg;
  neg.reserve(negative_gaps.size());
  for (double x : negative_gaps) {
    if (!(x > 0.0)) throw std::invalid_argument("counting path: gap <= 0");
    s -= x;
    neg.push_back(s);
  }
  for (std::size_t i = neg.size(); i-- > 0;) {
    t.push_back(neg[i]);
    v.push_back(-static_cast<double>(i + 1));
  }

  t.push_back(0.0);
  v.push_back(0.0);
  s = 0.0;
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    if (!(gaps[k] > 0.0)) throw std::invalid_argument("counting path: gap <= 0");
    s += gaps[k];
    t.push_back(s);
    v.push_back(static_cast<double>(k + 1));
  }
  if (t_hi < s)
    throw std::invalid_argument("counting path: horizon before last event");
  if (t_hi > s) {
    t.push_back(t_hi);
    v.push_back(v.back());
  }
  return PiecewisePath(PathKind::step, std::move(t), std::move(v));
}

PiecewisePath simulate_renewal(RngStream& g, const GapLaw& law,
                               Horizon horizon, bool two_sided) {
  std::vector<double> gaps, neg;
  double t_hi;
  if (horizon.kind == Horizon::Kind::by_events) {
    long n = static_cast<long>(horizon.value);
    if (n < 1) throw std::invalid_argument("simulate_renewal: need n >= 1");
    gaps.reserve(n);
    double s = 0.0;
    for (long k = 0; k < n; ++k) {
      double x = sample_gap(g, law);
      gaps.push_back(x);
      s += x;
    }
    t_hi = s;
    if (two_sided) {
      RngStream sub(g.raw(), 1);
      for (long k = 0; k < n; ++k) neg.push_back(sample_gap(sub, law));
    }
  } else {
    double T = horizon.value;
    if (!(T > 0.0)) throw std::invalid_argument("simulate_renewal: need T > 0");
    double s = 0.0;
    while (true) {
      double x = sample_gap(g, law);
      if (s + x > T) break;
      s += x;
      gaps.push_back(x);
    }
    t_hi = T;
    if (two_sided) {
      RngStream sub(g.raw(), 1);
      double sn = 0.0;
      while (sn < T) {
        double x = sample_gap(sub, law);
        sn += x;
        neg.push_back(x);
      }
    }
  }
  return counting_path(gaps, t_hi, neg);
}

std::vector<double> event_times(const PiecewisePath& counting) {
  const std::vector<double>& t = counting.breakpoints();
  const std::vector<double>& v = counting.values();
  std::vector<double> out;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > 0.0 && v[i] > v[i - 1]) out.push_back(t[i]);
  return out;
}

McEstimate return_sequence_mc(const GapLaw& law, double n, int n_paths,
                              std::uint64_t master_seed) {
  if (n_paths < 1) throw std::invalid_argument("return_sequence_mc: n_paths");
  if (n < 0.0) throw std::invalid_argument("return_sequence_mc: n < 0");
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n_paths; ++i) {
    RngStream g(master_seed, static_cast<std::uint64_t>(i));
    double s = 0.0;
    double count = 0.0;
    while (true) {
      s += sample_gap(g, law);
      if (s > n) break;
      count += 1.0;
    }
    sum += count;
    sumsq += count * count;
  }
  double mean = sum / n_paths;
  double se = std::numeric_limits<double>::quiet_NaN();
  if (n_paths > 1) {
    double var = (sumsq - n_paths * mean * mean) / (n_paths - 1);
    se = std::sqrt(std::max(var, 0.0) / n_paths);
  }
  return {mean, se};
}

CoupledPair coupled_pair(RngStream& g, const StableSpec& spec, long n_events,
                         int steps_per_unit) {
  if (n_events < 1) throw std::invalid_argument("coupled_pair: need n >= 1");
  if (steps_per_unit < 1)
    throw std::invalid_argument("coupled_pair: steps_per_unit >= 1");
  long m = steps_per_unit;
  long fine = n_events * m;
  StableSpec inc{spec.alpha, spec.lambda / m};

  std::vector<double> zt(fine + 1), zv(fine + 1);
  zt[0] = 0.0;
  zv[0] = 0.0;
  double z = 0.0;
  for (long j = 1; j <= fine; ++j) {
    z += sample_stable(g, inc);
    // once z is large, a small stable increment can fall below one ulp and
    // leave the running sum unchanged; the knot sequence must still increase
    // strictly, so represent such an increment by the smallest positive step
    if (z <= zt[j - 1]) z = std::nextafter(zt[j - 1], std::numeric_limits<double>::infinity());
    zt[j] = z;
    zv[j] = static_cast<double>(j) / m;
  }

  // gaps are the unit-time increments of Z, so S_k = Z(k) exactly and the
  // inverse interpolant hits (S_k, k) at its knots
  std::vector<double> nt, nv;
  nt.reserve(n_events + 1);
  nv.reserve(n_events + 1);
  nt.push_back(0.0);
  nv.push_back(0.0);
  for (long k = 1; k <= n_events; ++k) {
    nt.push_back(zt[k * m]);
    nv.push_back(static_cast<double>(k));
  }

  return {PiecewisePath(PathKind::linear, std::move(zt), std::move(zv)),
          PiecewisePath(PathKind::step, std::move(nt), std::move(nv))};
}

}  // namespace ergoflow
