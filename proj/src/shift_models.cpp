#include "ergoflow/shift_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ergoflow {

namespace {

void check_pmf_table(const std::vector<double>& p) {
  if (p.empty()) throw std::invalid_argument("GapPMF: empty table");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument("GapPMF: p_k >= 0 required");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("GapPMF: table must sum to 1 within 1e-12");
}

// laws supported by the integer-shift models
void check_integer_law(const GapLaw& law, const char* who) {
  switch (law.kind) {
    case GapKind::pareto_integer:
    case GapKind::geometric:
    case GapKind::table:
      return;
    default:
      throw std::invalid_argument(std::string(who) +
                                  ": integer-valued gap law required");
  }
}

long draw_gap(RngStream& g, const GapLaw& law) {
  return std::lround(sample_gap(g, law));
}

// shared accumulation of the two order-two forms from a state supplier
OrderTwoPair order_two_core(const std::function<long()>& next_state,
                            const std::function<double(long)>& phi, long k,
                            const std::function<double(double)>& ahat) {
  if (k < 2) throw std::invalid_argument("discrete_order_two: k >= 2 required");
  double running = 0.0;  // S_n(phi) as n advances
  double sum_i = 0.0, sum_ii = 0.0;
  double prev_phi = phi(next_state());  // phi(m_0)
  for (long n = 1; n <= k; ++n) {
    running += prev_phi;
    double an = ahat(static_cast<double>(n));
    sum_i += running / (an * static_cast<double>(n));
    prev_phi = phi(next_state());  // phi(m_n)
    sum_ii += prev_phi / an;
  }
  double ak = ahat(static_cast<double>(k));
  return {sum_i / std::log(static_cast<double>(k)), sum_ii / std::log(ak)};
}

}  // namespace

GapPMF GapPMF::table(std::vector<double> p) {
  check_pmf_table(p);
  GapPMF out;
  out.kind = PmfKind::table;
  out.p = std::move(p);
  return out;
}

GapPMF GapPMF::pareto_int(double alpha, std::size_t K) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("GapPMF::pareto_int: alpha in (0,1)");
  if (K < 1) throw std::invalid_argument("GapPMF::pareto_int: K >= 1");
  GapPMF out;
  out.kind = PmfKind::pareto_integer;
  out.alpha = alpha;
  out.p.resize(K);
  for (std::size_t k = 1; k < K; ++k)
    out.p[k - 1] = std::pow(static_cast<double>(k), -alpha) -
                   std::pow(static_cast<double>(k + 1), -alpha);
  out.p[K - 1] = std::pow(static_cast<double>(K), -alpha);  // folded tail
  return out;
}

GapPMF GapPMF::geometric(double q, std::size_t K) {
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("GapPMF::geometric: q in (0,1)");
  if (K < 1) throw std::invalid_argument("GapPMF::geometric: K >= 1");
  GapPMF out;
  out.kind = PmfKind::geometric;
  out.q = q;
  out.p.resize(K);
  for (std::size_t k = 1; k < K; ++k)
    out.p[k - 1] = q * std::pow(1.0 - q, static_cast<double>(k - 1));
  out.p[K - 1] = std::pow(1.0 - q, static_cast<double>(K - 1));  // folded tail
  return out;
}

std::vector<double> invariant_vector(const GapPMF& pmf) {
  const std::size_t K = pmf.p.size();
  std::vector<double> pi(K);
  switch (pmf.kind) {
    // closed-form tails keep pi exact where the table only approximates
    case PmfKind::pareto_integer:
      for (std::size_t k = 1; k <= K; ++k)
        pi[k - 1] = std::pow(static_cast<double>(k), -pmf.alpha);
      break;
    case PmfKind::geometric:
      for (std::size_t k = 1; k <= K; ++k)
        pi[k - 1] = std::pow(1.0 - pmf.q, static_cast<double>(k - 1));
      break;
    case PmfKind::table: {
      double tail = 0.0;
      for (std::size_t k = K; k >= 1; --k) {
        tail += pmf.p[k - 1];
        pi[k - 1] = tail;
      }
      break;
    }
  }
  return pi;
}

double invariant_residual(const GapPMF& pmf) {
  const std::vector<double> pi = invariant_vector(pmf);
  const std::size_t K = pi.size();
  double worst = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    double next = k < K ? pi[k] : 0.0;  // pi_{K+1} = 0 once the tail is folded
    double image = next + pi[0] * pmf.p[k - 1];
    worst = std::max(worst, std::abs(image - pi[k - 1]));
  }
  return worst;
}

MassResult total_mass(const GapPMF& pmf) {
  switch (pmf.kind) {
    case PmfKind::pareto_integer:
      // sum k p_k ~ sum k^-alpha diverges for every alpha < 1
      return {std::numeric_limits<double>::infinity(), true};
    case PmfKind::geometric:
      return {1.0 / pmf.q, false};
    case PmfKind::table: {
      double mass = 0.0;
      for (std::size_t k = 1; k <= pmf.p.size(); ++k)
        mass += static_cast<double>(k) * pmf.p[k - 1];
      return {mass, false};
    }
  }
  throw std::logic_error("total_mass: unreachable");
}

MarkovSampler::MarkovSampler(const GapPMF& pmf) : cum_(pmf.p) {
  check_pmf_table(pmf.p);
  std::partial_sum(cum_.begin(), cum_.end(), cum_.begin());
}

long MarkovSampler::draw(double u) const {
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("MarkovSampler::draw: u in (0,1)");
  auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) --it;  // u beyond the last cumulative: top state
  return static_cast<long>(it - cum_.begin()) + 1;
}

ShiftOrbit simulate_shift_orbit(const GapLaw& law, long n_steps, RngStream& g) {
  check_integer_law(law, "simulate_shift_orbit");
  if (n_steps < 1)
    throw std::invalid_argument("simulate_shift_orbit: n_steps >= 1");
  ShiftOrbit o;
  o.tower.reserve(n_steps);
  o.markov.reserve(n_steps);
  o.event.reserve(n_steps);
  o.increment.reserve(n_steps + 1);
  long visits = 0;
  o.increment.push_back(0);
  while (static_cast<long>(o.markov.size()) < n_steps) {
    long gap = draw_gap(g, law);
    o.gaps.push_back(gap);
    for (long j = 0; j < gap && static_cast<long>(o.markov.size()) < n_steps;
         ++j) {
      o.tower.push_back({gap, j});
      o.markov.push_back(j == 0 ? 1 : gap - j + 1);
      o.event.push_back(j == 0 ? 1 : 0);
      visits += j == 0 ? 1 : 0;
      o.increment.push_back(visits);
    }
  }
  return o;
}

TowerState tower_step(const TowerState& s, const std::function<long()>& next_gap) {
  if (s.k < 1 || s.j < 0 || s.j >= s.k)
    throw std::invalid_argument("tower_step: need 0 <= j < k");
  if (s.j + 1 < s.k) return {s.k, s.j + 1};
  return {next_gap(), 0};
}

long markov_step(long m, const std::function<long()>& next_gap) {
  if (m < 1) throw std::invalid_argument("markov_step: state >= 1");
  return m > 1 ? m - 1 : next_gap();
}

std::vector<long> tower_to_markov(const std::vector<TowerState>& w) {
  std::vector<long> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    out[i] = w[i].j == 0 ? 1 : w[i].k - w[i].j + 1;
  return out;
}

std::vector<int> tower_to_event(const std::vector<TowerState>& w) {
  std::vector<int> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i].j == 0 ? 1 : 0;
  return out;
}

std::vector<int> markov_to_event(const std::vector<long>& w) {
  std::vector<int> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] == 1 ? 1 : 0;
  return out;
}

std::vector<long> event_to_increment(const std::vector<int>& y) {
  std::vector<long> out(y.size() + 1);
  out[0] = 0;
  for (std::size_t i = 0; i < y.size(); ++i) out[i + 1] = out[i] + y[i];
  return out;
}

std::vector<int> increment_to_event(const std::vector<long>& n) {
  if (n.empty())
    throw std::invalid_argument("increment_to_event: empty word");
  std::vector<int> out(n.size() - 1);
  for (std::size_t i = 0; i + 1 < n.size(); ++i) {
    long d = n[i + 1] - n[i];
    if (d != 0 && d != 1)
      throw std::invalid_argument(
          "increment_to_event: increments must step by 0 or 1");
    out[i] = static_cast<int>(d);
  }
  return out;
}

std::vector<long> event_to_markov(const std::vector<int>& y) {
  const std::size_t n = y.size();
  // resolvable prefix: positions up to the last event (later zeros belong to
  // a block whose countdown height is not yet visible)
  std::size_t last = n;
  for (std::size_t i = n; i-- > 0;)
    if (y[i] == 1) {
      last = i;
      break;
    }
  if (last == n)
    throw std::domain_error(
        "event_to_markov: window contains no event; extend the window");
  std::vector<long> out(last + 1);
  std::size_t next = last;  // nearest event at or after the cursor
  for (std::size_t ii = last + 1; ii-- > 0;) {
    if (y[ii] == 1) {
      out[ii] = 1;
      next = ii;
    } else {
      out[ii] = static_cast<long>(next - ii) + 1;
    }
  }
  return out;
}

std::vector<TowerState> event_to_tower(const std::vector<int>& y) {
  if (y.empty() || y[0] != 1)
    throw std::domain_error(
        "event_to_tower: window must start at an event; extend the window");
  const std::size_t n = y.size();
  // resolvable prefix: strictly before the last event, whose block gap the
  // window cannot close
  std::size_t last = 0;
  for (std::size_t i = n; i-- > 0;)
    if (y[i] == 1) {
      last = i;
      break;
    }
  if (last == 0)
    throw std::domain_error(
        "event_to_tower: no later event closes the first block; extend the window");
  std::vector<TowerState> out(last);
  std::size_t prev = 0, next = 1;
  for (std::size_t i = 0; i < last; ++i) {
    if (y[i] == 1) {
      prev = i;
      next = i + 1;
      while (y[next] == 0) ++next;  // guaranteed to stop at or before `last`
    }
    out[i] = {static_cast<long>(next - prev), static_cast<long>(i - prev)};
  }
  return out;
}

std::vector<TowerState> markov_to_tower(const std::vector<long>& w) {
  const std::size_t n = w.size();
  for (std::size_t i = 1; i < n; ++i)
    if (w[i - 1] > 1 && w[i] != w[i - 1] - 1)
      throw std::invalid_argument(
          "markov_to_tower: malformed countdown at position " +
          std::to_string(i));
  if (n == 0 || w[0] != 1)
    throw std::domain_error(
        "markov_to_tower: window must start at an event; extend the window");
  // only a trailing event is unresolvable (its block gap is the next state,
  // which lies beyond the window)
  const std::size_t len = w[n - 1] == 1 ? n - 1 : n;
  if (len == 0)
    throw std::domain_error(
        "markov_to_tower: lone event leaves its block gap unresolved; "
        "extend the window");
  std::vector<TowerState> out(len);
  std::size_t prev = 0;
  for (std::size_t i = 0; i < len; ++i) {
    if (w[i] == 1) {
      prev = i;
      out[i] = {w[i + 1], 0};  // next state is the block gap (1 when k = 1)
    } else {
      long j = static_cast<long>(i - prev);
      out[i] = {w[i] + j - 1, j};
    }
  }
  return out;
}

OrderTwoPair discrete_order_two(const std::vector<long>& markov_word,
                                const std::function<double(long)>& phi, long k,
                                const std::function<double(double)>& ahat) {
  if (static_cast<long>(markov_word.size()) < k + 1)
    throw std::invalid_argument(
        "discrete_order_two: word length >= k+1 required");
  std::size_t cursor = 0;
  return order_two_core([&] { return markov_word[cursor++]; }, phi, k, ahat);
}

OrderTwoPair discrete_order_two_run(const GapLaw& law,
                                    const std::function<double(long)>& phi,
                                    long k, RngStream& g) {
  check_integer_law(law, "discrete_order_two_run");
  NormalizerTriple norm = normalizers(law);
  // stream the countdown word without materializing it: each block emits the
  // visit 1, then gap, gap-1, ..., 2
  long m = 0;
  long pending = 0;  // countdown states still owed before the next visit
  auto next_state = [&]() -> long {
    if (pending > 0) {
      --pending;
      return m--;
    }
    long gap = draw_gap(g, law);
    m = gap;
    pending = gap - 1;
    return 1;
  };
  return order_two_core(next_state, phi, k, norm.ahat);
}

std::vector<long> occupation_counts(const GapLaw& law, long n_steps,
                                    long max_state, RngStream& g) {
  check_integer_law(law, "occupation_counts");
  if (n_steps < 1) throw std::invalid_argument("occupation_counts: n_steps >= 1");
  if (max_state < 1)
    throw std::invalid_argument("occupation_counts: max_state >= 1");
  std::vector<long> counts(max_state, 0);
  long remaining = n_steps;
  while (remaining > 0) {
    long gap = draw_gap(g, law);
    if (gap >= remaining) {
      // partial block: states 1, gap, gap-1, ..., gap-remaining+2
      ++counts[0];
      long lo = gap - remaining + 2;  // smallest countdown state reached
      for (long s = std::max(2L, lo); s <= std::min(gap, max_state); ++s)
        ++counts[s - 1];
      break;
    }
    // full block visits 1 once and each of 2..gap once
    for (long s = 1; s <= std::min(gap, max_state); ++s) ++counts[s - 1];
    remaining -= gap;
  }
  return counts;
}

void dump_orbit_csv(std::ostream& os, const ShiftOrbit& orbit) {
  os << "n,state,Y,N\n";
  for (std::size_t i = 0; i < orbit.markov.size(); ++i)
    os << i << ',' << orbit.markov[i] << ',' << orbit.event[i] << ','
       << orbit.increment[i] << '\n';
}

}  // namespace ergoflow
