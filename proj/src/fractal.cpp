#include "ergoflow/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ergoflow {

namespace {

void check_alpha_open(double alpha, const char* who) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument(std::string(who) + ": alpha in (0,1) required");
}

}  // namespace

GaugeValue gauge_psi(double t, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("gauge_psi: alpha in (0,1] required");
  if (!(t > 0.0)) throw std::domain_error("gauge_psi: t > 0 required");
  double power = std::pow(t, alpha);
  // log log 1/t is positive only below 1/e; the clamp keeps sweeps total
  // (alpha = 1 is seamless: the exponent 1 - alpha kills the log factor)
  if (t >= std::exp(-1.0)) return {power, true};
  double loglog = std::log(std::log(1.0 / t));
  return {power * std::pow(loglog, 1.0 - alpha), false};
}

double order_two_density(const PiecewisePath& zhat, double alpha, double S) {
  check_alpha_open(alpha, "order_two_density");
  if (!(S > 0.0))
    throw std::invalid_argument("order_two_density: S > 0 required");
  if (zhat.kind() != PathKind::step)
    throw std::invalid_argument("order_two_density: step path required");
  if (zhat.window().lo > 0.0 || zhat.window().hi < 1.0)
    throw std::domain_error("order_two_density: window must cover [0, 1]");

  const std::vector<double>& t = zhat.breakpoints();
  const std::vector<double>& v = zhat.values();
  const double u_min = std::exp(-S);
  double finest = std::numeric_limits<double>::infinity();
  for (double b : t)
    if (b > 0.0) {
      finest = b;
      break;
    }
  // A leading piece of height exactly zero is data, not a resolution
  // placeholder: reading it above e^-S contributes nothing.  Any other
  // leading value is the grid's first knot, so it must sit below e^-S.
  if (!(finest <= u_min) && v.front() != 0.0) {
    std::ostringstream msg;
    msg << "order_two_density: path resolves scale " << finest
        << " but e^-S = " << u_min << " is required";
    throw std::domain_error(msg.str());
  }

  // after u = e^-s the average is (1/S) integral_{e^-S}^1 zhat(u) u^-a-1 du;
  // each flat piece has the closed-form antiderivative -u^-a / a
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    double lo = std::max(t[i], u_min);
    double hi = std::min(t[i + 1], 1.0);
    if (!(hi > lo)) continue;
    acc += v[i] * (std::pow(lo, -alpha) - std::pow(hi, -alpha)) / alpha;
  }
  return acc / S;
}

double order_two_density_fn(const std::function<double(double)>& zhat,
                            double alpha, double S, int pts_per_unit) {
  check_alpha_open(alpha, "order_two_density");
  if (!(S > 0.0))
    throw std::invalid_argument("order_two_density: S > 0 required");
  if (pts_per_unit < 1)
    throw std::invalid_argument("order_two_density: pts_per_unit >= 1");
  long n = std::max<long>(2, std::lround(std::ceil(S * pts_per_unit)));
  double h = S / static_cast<double>(n);
  auto integrand = [&](double s) {
    return zhat(std::exp(-s)) * std::exp(alpha * s);
  };
  double sum = 0.5 * (integrand(0.0) + integrand(S));
  for (long i = 1; i < n; ++i) sum += integrand(h * static_cast<double>(i));
  return sum * h / S;
}

PiecewisePath sample_zhat_path(RngStream& g, const StableSpec& spec,
                               double s_min, double ratio) {
  if (!(s_min > 0.0) || !(ratio > 1.0))
    throw std::invalid_argument(
        "sample_zhat_path: s_min > 0 and ratio > 1 required");
  std::vector<double> bp{0.0};
  std::vector<double> val;
  double s_prev = 0.0, s = s_min, z = 0.0;
  while (true) {
    double inc = std::pow(s - s_prev, 1.0 / spec.alpha) * sample_stable(g, spec);
    z += inc;
    bp.push_back(z);
    val.push_back(s);
    if (z > 1.0) break;
    s_prev = s;
    s *= ratio;
  }
  val.push_back(val.back());  // value at the right endpoint
  return PiecewisePath(PathKind::step, std::move(bp), std::move(val));
}

std::vector<double> subordinator_range_points(RngStream& g,
                                              const StableSpec& spec, double t,
                                              int n_grid) {
  if (!(t > 0.0) || n_grid < 1)
    throw std::invalid_argument(
        "subordinator_range_points: t > 0 and n_grid >= 1 required");
  double scale = std::pow(t / n_grid, 1.0 / spec.alpha);
  std::vector<double> pts(static_cast<std::size_t>(n_grid) + 1);
  pts[0] = 0.0;
  for (int i = 1; i <= n_grid; ++i)
    pts[i] = pts[i - 1] + scale * sample_stable(g, spec);
  return pts;
}

double hausdorff_cover_estimate(const std::vector<double>& points,
                                const std::function<double(double)>& gauge,
                                double delta, double delta_min) {
  if (!(delta > 0.0))
    throw std::invalid_argument("hausdorff_cover_estimate: delta > 0 required");
  if (!(delta_min >= 0.0))
    throw std::invalid_argument(
        "hausdorff_cover_estimate: delta_min >= 0 required");
  if (!std::is_sorted(points.begin(), points.end()))
    throw std::invalid_argument("hausdorff_cover_estimate: points not sorted");
  double acc = 0.0;
  std::size_t i = 0;
  while (i < points.size()) {
    std::size_t j = i;
    while (j + 1 < points.size() && points[j + 1] - points[i] <= delta) ++j;
    acc += gauge(std::max(points[j] - points[i], delta_min));
    i = j + 1;
  }
  return acc;
}

namespace {

PiecewisePath counting_path_of_events(const std::vector<double>& events,
                                      double T) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    bool ordered = i == 0 ? events[i] > 0.0 : events[i] > events[i - 1];
    if (!ordered || events[i] > T)
      throw std::invalid_argument(
          "integer_order_two: events must be strictly increasing within "
          "(0, T]");
  }
  std::vector<double> bp{0.0}, val{0.0};
  for (std::size_t i = 0; i < events.size(); ++i) {
    bp.push_back(events[i]);
    val.push_back(static_cast<double>(i + 1));
  }
  if (bp.back() < T) {
    bp.push_back(T);
    val.push_back(val.back());
  }
  return PiecewisePath(PathKind::step, std::move(bp), std::move(val));
}

}  // namespace

LogAverageResult integer_order_two(const std::vector<double>& events,
                                   double alpha, double T) {
  return log_average_power(counting_path_of_events(events, T), alpha, T);
}

LogAverageResult integer_order_two(const std::vector<double>& events,
                                   const std::function<double(double)>& ahat,
                                   double T, double rel_tol) {
  return log_average_general(counting_path_of_events(events, T), ahat, T,
                             rel_tol);
}

}  // namespace ergoflow
