#include "ergoflow/stable.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ergoflow {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("stable: alpha must lie in (0,1)");
}

void check_spec(const StableSpec& s) {
  check_alpha(s.alpha);
  if (!(s.lambda > 0.0))
    throw std::invalid_argument("stable: lambda must be positive");
}

}  // namespace

double canonical_lambda(double alpha) {
  check_alpha(alpha);
  return std::tgamma(1.0 - alpha);
}

StableSpec canonical_spec(double alpha) {
  return {alpha, canonical_lambda(alpha)};
}

ConstantTable constants(double alpha) {
  check_alpha(alpha);
  const double pi = std::numbers::pi;
  ConstantTable t;
  t.alpha = alpha;
  t.c = std::sin(pi * alpha) / (pi * alpha);
  t.c_alpha = std::pow(alpha, 1.0 - alpha) * std::pow(1.0 - alpha, alpha) /
              std::tgamma(3.0 - alpha);
  t.c_check = std::tgamma(3.0 - alpha) / (alpha * (1.0 - alpha));
  t.c_hat = 1.0 / t.c_check;
  t.c_tilde = std::pow(alpha, alpha) * std::pow(1.0 - alpha, 1.0 - alpha);
  return t;
}

double kanter_value(double alpha, double lambda, double u, double w) {
  check_spec({alpha, lambda});
  if (!(u > 0.0 && u < std::numbers::pi) || !(w > 0.0))
    throw std::domain_error("kanter: need u in (0,pi) and w > 0");
  const double sa = std::sin(alpha * u);
  const double sb = std::sin((1.0 - alpha) * u);
  const double s = std::sin(u);
  const double a =
      std::pow(std::pow(sa, alpha) * std::pow(sb, 1.0 - alpha) / s,
               1.0 / (1.0 - alpha));
  return std::pow(a / w, (1.0 - alpha) / alpha) *
         std::pow(lambda, 1.0 / alpha);
}

double sample_stable(RngStream& g, const StableSpec& spec) {
  const double u = g.u01() * std::numbers::pi;
  const double w = g.exponential();
  return kanter_value(spec.alpha, spec.lambda, u, w);
}

double stable_negative_moment(const StableSpec& spec, double s) {
  check_spec(spec);
  if (!(s > 0.0))
    throw std::invalid_argument("stable_negative_moment: s must be positive");
  return std::tgamma(s / spec.alpha) /
         (spec.alpha * std::tgamma(s) *
          std::pow(spec.lambda, s / spec.alpha));
}

double ml_mean(const StableSpec& spec) {
  return stable_negative_moment(spec, spec.alpha);
}

double ml_variance(const StableSpec& spec) {
  const double m = ml_mean(spec);
  return stable_negative_moment(spec, 2.0 * spec.alpha) - m * m;
}

PiecewisePath simulate_subordinator(RngStream& g, const StableSpec& spec,
                                    double t_hi, int steps_per_unit) {
  check_spec(spec);
  if (!(t_hi > 0.0) || steps_per_unit < 1)
    throw std::invalid_argument("simulate_subordinator: bad grid");
  const int n = static_cast<int>(std::ceil(t_hi * steps_per_unit));
  const StableSpec inc{spec.alpha, spec.lambda / steps_per_unit};
  std::vector<double> t(n + 1), v(n + 1);
  t[0] = 0.0;
  v[0] = 0.0;
  for (int k = 1; k <= n; ++k) {
    t[k] = static_cast<double>(k) / steps_per_unit;
    v[k] = v[k - 1] + sample_stable(g, inc);
  }
  return PiecewisePath(PathKind::step, std::move(t), std::move(v));
}

PiecewisePath mittag_leffler_path(RngStream& g, const StableSpec& spec,
                                  double horizon, int steps_per_unit) {
  check_spec(spec);
  if (!(horizon > 0.0) || steps_per_unit < 1)
    throw std::invalid_argument("mittag_leffler_path: bad grid");
  const StableSpec inc{spec.alpha, spec.lambda / steps_per_unit};
  std::vector<double> t{0.0}, v{0.0};
  int k = 0;
  // one step beyond the horizon so the inverse window covers [0, horizon]
  while (v.back() <= horizon) {
    ++k;
    t.push_back(static_cast<double>(k) / steps_per_unit);
    v.push_back(v.back() + sample_stable(g, inc));
  }
  PiecewisePath z(PathKind::step, std::move(t), std::move(v));
  return generalized_inverse(z).restrict({0.0, horizon});
}

double sample_ml(RngStream& g, const StableSpec& spec, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("sample_ml: t must be positive");
  const double z = sample_stable(g, spec);
  return std::pow(t / z, spec.alpha);
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (!(lo < hi) || n < 1) throw std::invalid_argument("uniform_grid: bad grid");
  std::vector<double> g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = lo + (hi - lo) * i / n;
  return g;
}

std::vector<double> geometric_grid(double lo, double hi, double ratio) {
  if (!(lo > 0.0) || !(lo < hi) || !(ratio > 1.0))
    throw std::invalid_argument("geometric_grid: bad grid");
  std::vector<double> g{lo};
  while (g.back() * ratio < hi) g.push_back(g.back() * ratio);
  g.push_back(hi);
  return g;
}

}  // namespace ergoflow
