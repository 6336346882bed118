#include "ergoflow/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ergoflow {

PiecewisePath::PiecewisePath(PathKind kind, std::vector<double> t,
                             std::vector<double> v)
    : kind_(kind), t_(std::move(t)), v_(std::move(v)) {
  if (t_.size() != v_.size())
    throw std::invalid_argument("path: breakpoint/value size mismatch");
  if (t_.size() < 2)
    throw std::invalid_argument("path: need at least two breakpoints");
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (!std::isfinite(t_[i]) || !std::isfinite(v_[i]))
      throw std::invalid_argument("path: non-finite data");
    if (i > 0 && !(t_[i] > t_[i - 1]))
      throw std::invalid_argument("path: breakpoints must increase strictly");
  }
}

double PiecewisePath::operator()(double x) const {
  if (x < t_.front() || x > t_.back())
    throw std::domain_error("path: evaluation outside window");
  auto it = std::upper_bound(t_.begin(), t_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  if (kind_ == PathKind::step) return v_[i];
  if (i + 1 == t_.size()) return v_.back();
  const double w = (x - t_[i]) / (t_[i + 1] - t_[i]);
  return v_[i] + w * (v_[i + 1] - v_[i]);
}

double PiecewisePath::left_limit(double x) const {
  if (x < t_.front() || x > t_.back())
    throw std::domain_error("path: evaluation outside window");
  if (kind_ == PathKind::linear) return (*this)(x);
  auto it = std::lower_bound(t_.begin(), t_.end(), x);
  if (it != t_.end() && *it == x) {
    const std::size_t i = static_cast<std::size_t>(it - t_.begin());
    return i == 0 ? v_.front() : v_[i - 1];
  }
  return (*this)(x);
}

bool PiecewisePath::is_nondecreasing() const {
  for (std::size_t i = 1; i < v_.size(); ++i)
    if (v_[i] < v_[i - 1]) return false;
  return true;
}

PiecewisePath PiecewisePath::restrict(Window w) const {
  if (!(w.lo < w.hi) || w.lo < t_.front() || w.hi > t_.back())
    throw std::domain_error("restrict: window not inside path window");
  std::vector<double> nt{w.lo};
  std::vector<double> nv{(*this)(w.lo)};
  for (std::size_t i = 0; i < t_.size(); ++i)
    if (t_[i] > w.lo && t_[i] < w.hi) {
      nt.push_back(t_[i]);
      nv.push_back(v_[i]);
    }
  nt.push_back(w.hi);
  nv.push_back((*this)(w.hi));
  return PiecewisePath(kind_, std::move(nt), std::move(nv));
}

PiecewisePath generalized_inverse(const PiecewisePath& p) {
  if (!p.is_nondecreasing())
    throw std::domain_error("generalized_inverse: path must be nondecreasing");
  const auto& t = p.breakpoints();
  const auto& v = p.values();
  if (p.kind() == PathKind::linear) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1]))
        throw std::domain_error(
            "generalized_inverse: linear path must increase strictly");
    return PiecewisePath(PathKind::linear, v, t);
  }
  // distinct levels and the first breakpoint attaining each
  std::vector<double> lev, att;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (i == 0 || v[i] > v[i - 1]) {
      lev.push_back(v[i]);
      att.push_back(t[i]);
    }
  if (lev.size() < 2)
    throw std::domain_error(
        "generalized_inverse: constant path has an empty inverse window");
  // inf{x : f(x) > s} = att[j+1] for s in [lev[j], lev[j+1]); the window
  // closes at the last level, repeating the final value
  std::vector<double> iv(att.begin() + 1, att.end());
  iv.push_back(att.back());
  return PiecewisePath(PathKind::step, std::move(lev), std::move(iv));
}

PiecewisePath scaling_flow(const PiecewisePath& p, double t, double beta) {
  const double ct = std::exp(-t);
  const double cv = std::exp(-beta * t);
  std::vector<double> nt(p.breakpoints());
  std::vector<double> nv(p.values());
  for (auto& x : nt) x *= ct;
  for (auto& y : nv) y *= cv;
  return PiecewisePath(p.kind(), std::move(nt), std::move(nv));
}

PiecewisePath increment_flow(const PiecewisePath& p, double s) {
  const Window w = p.window();
  if (!(s >= w.lo && s < w.hi))
    throw std::domain_error("increment_flow: shift outside window");
  const double fs = p(s);
  std::vector<double> nt(p.breakpoints());
  std::vector<double> nv(p.values());
  for (auto& x : nt) x -= s;
  for (auto& y : nv) y -= fs;
  return PiecewisePath(p.kind(), std::move(nt), std::move(nv));
}

PiecewisePath dual_increment_flow(const PiecewisePath& p, double s) {
  return generalized_inverse(increment_flow(generalized_inverse(p), s));
}

double first_increase(const PiecewisePath& p) {
  const auto& t = p.breakpoints();
  const auto& v = p.values();
  const double v0 = v.front();
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v0) return p.kind() == PathKind::step ? t[i] : t[i - 1];
  throw std::domain_error("first_increase: path never exceeds initial value");
}

namespace {

std::vector<double> merged_breakpoints(const PiecewisePath& a,
                                       const PiecewisePath& b, Window w) {
  std::vector<double> m{w.lo, w.hi};
  for (const auto* p : {&a, &b})
    for (double x : p->breakpoints())
      if (x > w.lo && x < w.hi) m.push_back(x);
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end()), m.end());
  return m;
}

void check_covers(const PiecewisePath& p, Window w) {
  if (p.window().lo > w.lo || p.window().hi < w.hi)
    throw std::domain_error("sup_distance: window not covered by both paths");
}

}  // namespace

double sup_distance(const PiecewisePath& a, const PiecewisePath& b, Window w) {
  if (!(w.lo <= w.hi)) throw std::domain_error("sup_distance: empty window");
  check_covers(a, w);
  check_covers(b, w);
  const auto m = merged_breakpoints(a, b, w);
  // piecewise-affine difference on every cell: values and left limits at the
  // merged breakpoints dominate
  double d = 0.0;
  for (double x : m) {
    d = std::max(d, std::abs(a(x) - b(x)));
    if (x > w.lo) d = std::max(d, std::abs(a.left_limit(x) - b.left_limit(x)));
  }
  return d;
}

double sup_distance(const PiecewisePath& a, const PiecewisePath& b) {
  Window w{std::max(a.window().lo, b.window().lo),
           std::min(a.window().hi, b.window().hi)};
  if (!(w.lo <= w.hi)) throw std::domain_error("sup_distance: disjoint windows");
  return sup_distance(a, b, w);
}

double essential_sup_distance(const PiecewisePath& a, const PiecewisePath& b,
                              Window w) {
  if (!(w.lo <= w.hi))
    throw std::domain_error("essential_sup_distance: empty window");
  check_covers(a, w);
  check_covers(b, w);
  const auto m = merged_breakpoints(a, b, w);
  // two interior samples per cell pin an affine difference without ever
  // straddling a jump; cells below float resolution are the slivers between
  // float-adjacent images of the same jump and are skipped outright
  double d = 0.0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    const double h = m[i + 1] - m[i];
    if (h <= 1e-12 * (1.0 + std::abs(m[i]) + std::abs(m[i + 1]))) continue;
    for (double f : {1.0 / 3.0, 2.0 / 3.0}) {
      const double x = m[i] + f * h;
      d = std::max(d, std::abs(a(x) - b(x)));
    }
  }
  return d;
}

namespace {

Window intersect_windows(const PiecewisePath& a, const PiecewisePath& b) {
  Window w{std::max(a.window().lo, b.window().lo),
           std::min(a.window().hi, b.window().hi)};
  if (!(w.lo <= w.hi))
    throw std::domain_error("commutation_check: disjoint windows");
  return w;
}

}  // namespace

double commutation_check(const PiecewisePath& p, double s, double t,
                         double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("commutation_check: alpha must be in (0,1)");
  // scaling and increment flows, index 1/alpha
  const double beta = 1.0 / alpha;
  const PiecewisePath a1 = scaling_flow(increment_flow(p, s), t, beta);
  const PiecewisePath b1 =
      increment_flow(scaling_flow(p, t, beta), std::exp(-t) * s);
  double r = essential_sup_distance(a1, b1, intersect_windows(a1, b1));

  // conjugated flows on the inverse side, index alpha; the shift dual to
  // time s is the level p(s)
  const double sv = p(s);
  const PiecewisePath a2 =
      scaling_flow(dual_increment_flow(p, sv), t, alpha);
  const PiecewisePath b2 = dual_increment_flow(scaling_flow(p, t, alpha),
                                               std::exp(-alpha * t) * sv);
  r = std::max(r, essential_sup_distance(a2, b2, intersect_windows(a2, b2)));
  return r;
}

std::pair<PiecewisePath, PiecewisePath> hahn_decompose(const PiecewisePath& p) {
  const auto& v = p.values();
  std::vector<double> plus(v.size(), 0.0), minus(v.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double d = v[i] - v[i - 1];
    plus[i] = plus[i - 1] + std::max(d, 0.0);
    minus[i] = minus[i - 1] + std::max(-d, 0.0);
  }
  return {PiecewisePath(p.kind(), p.breakpoints(), std::move(plus)),
          PiecewisePath(p.kind(), p.breakpoints(), std::move(minus))};
}

std::vector<GraphSegment> completed_graph(const PiecewisePath& p) {
  if (!p.is_nondecreasing())
    throw std::domain_error("completed_graph: path must be nondecreasing");
  const auto& t = p.breakpoints();
  const auto& v = p.values();
  std::vector<GraphSegment> out;
  if (p.kind() == PathKind::linear) {
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
      out.push_back({t[i], v[i], t[i + 1], v[i + 1]});
    return out;
  }
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    out.push_back({t[i], v[i], t[i + 1], v[i]});
    if (v[i + 1] > v[i])  // vertical fill across the jump
      out.push_back({t[i + 1], v[i], t[i + 1], v[i + 1]});
  }
  return out;
}

std::vector<GraphSegment> dual_graph(const std::vector<GraphSegment>& segs) {
  std::vector<GraphSegment> out;
  out.reserve(segs.size());
  for (const auto& g : segs) out.push_back({g.y0, g.x0, g.y1, g.x1});
  return out;
}

namespace {

struct Pt {
  double x, y;
};

// chain segments into the corner polyline of a monotone curve
std::vector<Pt> to_polyline(const std::vector<GraphSegment>& segs,
                            double tol) {
  std::vector<GraphSegment> s;
  s.reserve(segs.size());
  for (GraphSegment g : segs) {
    if (g.x1 < g.x0 || (g.x1 == g.x0 && g.y1 < g.y0)) {
      std::swap(g.x0, g.x1);
      std::swap(g.y0, g.y1);
    }
    if (g.x0 == g.x1 && g.y0 == g.y1) continue;
    s.push_back(g);
  }
  std::sort(s.begin(), s.end(), [](const GraphSegment& a,
                                   const GraphSegment& b) {
    return a.x0 != b.x0 ? a.x0 < b.x0 : a.y0 < b.y0;
  });
  std::vector<Pt> pts;
  for (const auto& g : s) {
    if (pts.empty()) {
      pts.push_back({g.x0, g.y0});
    } else if (std::abs(pts.back().x - g.x0) > tol ||
               std::abs(pts.back().y - g.y0) > tol) {
      throw std::domain_error("graphs_equal: segments do not chain");
    }
    pts.push_back({g.x1, g.y1});
  }
  return pts;
}

// drop sub-tol edges and merge consecutive edges with equal direction
std::vector<Pt> canonical(std::vector<Pt> pts, double tol) {
  std::vector<Pt> out;
  auto dir = [](const Pt& a, const Pt& b, double& ux, double& uy) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double n = std::hypot(dx, dy);
    ux = dx / n;
    uy = dy / n;
    return n;
  };
  for (const Pt& p : pts) {
    if (!out.empty() && std::abs(p.x - out.back().x) <= tol &&
        std::abs(p.y - out.back().y) <= tol)
      continue;
    while (out.size() >= 2) {
      double ux1, uy1, ux2, uy2;
      dir(out[out.size() - 2], out.back(), ux1, uy1);
      dir(out.back(), p, ux2, uy2);
      if (std::abs(ux1 - ux2) <= 1e-9 && std::abs(uy1 - uy2) <= 1e-9)
        out.pop_back();
      else
        break;
    }
    out.push_back(p);
  }
  return out;
}

struct Box {
  double xlo, xhi, ylo, yhi;
};

// clip a monotone polyline to a box; the inside portion is contiguous
std::vector<Pt> clip(const std::vector<Pt>& pts, const Box& b) {
  std::vector<Pt> out;
  auto push = [&](Pt q) {
    if (out.empty() || q.x != out.back().x || q.y != out.back().y)
      out.push_back(q);
  };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Pt a = pts[i], c = pts[i + 1];
    double t0 = 0.0, t1 = 1.0;
    bool ok = true;
    auto axis = [&](double pa, double pc, double lo, double hi) {
      const double d = pc - pa;  // >= 0 on a monotone curve
      if (d == 0.0) {
        if (pa < lo || pa > hi) ok = false;
        return;
      }
      t0 = std::max(t0, (lo - pa) / d);
      t1 = std::min(t1, (hi - pa) / d);
    };
    axis(a.x, c.x, b.xlo, b.xhi);
    axis(a.y, c.y, b.ylo, b.yhi);
    if (!ok || t0 > t1) continue;
    push({a.x + t0 * (c.x - a.x), a.y + t0 * (c.y - a.y)});
    push({a.x + t1 * (c.x - a.x), a.y + t1 * (c.y - a.y)});
  }
  return out;
}

}  // namespace

bool graphs_equal(const std::vector<GraphSegment>& a,
                  const std::vector<GraphSegment>& b, double tol) {
  auto pa = canonical(to_polyline(a, tol), tol);
  auto pb = canonical(to_polyline(b, tol), tol);
  if (pa.empty() || pb.empty()) return pa.empty() == pb.empty();
  // monotone curves: the bounding box is spanned by the endpoints
  const Box box{std::max(pa.front().x, pb.front().x),
                std::min(pa.back().x, pb.back().x),
                std::max(pa.front().y, pb.front().y),
                std::min(pa.back().y, pb.back().y)};
  if (box.xlo > box.xhi || box.ylo > box.yhi) return true;  // nothing shared
  pa = canonical(clip(pa, box), tol);
  pb = canonical(clip(pb, box), tol);
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (std::abs(pa[i].x - pb[i].x) > tol || std::abs(pa[i].y - pb[i].y) > tol)
      return false;
  return true;
}

}  // namespace ergoflow
