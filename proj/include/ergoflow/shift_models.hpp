#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ergoflow/renewal.hpp"
#include "ergoflow/rng.hpp"

namespace ergoflow {

// Gap distribution on {1, 2, ...} truncated to {1..K}, with the tail mass
// P(X >= K) folded into p_K.  Folding keeps the tail sums pi_k exact for
// k <= K, so the invariant vector of the truncation is the true one; the
// approximation shows up only in moments, which the closed-form families
// below therefore compute from their analytic identity, not the table.
enum class PmfKind { table, pareto_integer, geometric };

struct GapPMF {
  PmfKind kind = PmfKind::table;
  double alpha = 0.0;      // pareto_integer: P(X > k) = (k+1)^-alpha
  double q = 0.0;          // geometric: P(X = k) = q (1-q)^(k-1)
  std::vector<double> p;   // p[k-1] = P(X = k), k = 1..K, tail folded into p[K-1]

  static GapPMF table(std::vector<double> p);
  static GapPMF pareto_int(double alpha, std::size_t K);
  static GapPMF geometric(double q, std::size_t K);
};

// pi_k = sum_{i >= k} p_i for k = 1..K: the (unnormalized) invariant vector
// of the renewal shift, pinned by pi_1 = 1
std::vector<double> invariant_vector(const GapPMF& pmf);

// max_k |(pi P)_k - pi_k| for the countdown transition matrix P.  P is
// sparse -- row m > 1 is the unit mass at m-1 and row 1 is the pmf -- so the
// action reduces to (pi P)_k = pi_{k+1} + pi_1 p_k.
double invariant_residual(const GapPMF& pmf);

// total mass sum_k k p_k of the invariant measure; divergent families are
// flagged rather than summed through the truncation
struct MassResult {
  double value;
  bool diverged;
};
MassResult total_mass(const GapPMF& pmf);

// Inverse-CDF sampler for the jump out of state 1 (equivalently, a fresh
// gap): smallest k with u <= p_1 + ... + p_k, found by binary search over
// cached cumulative sums.
class MarkovSampler {
 public:
  explicit MarkovSampler(const GapPMF& pmf);
  long draw(double u) const;

 private:
  std::vector<double> cum_;
};

// ---------------------------------------------------------------------------
// The four isomorphic models of the renewal shift.  One underlying gap word
// (x_0, x_1, ...) drives all of them:
//   tower      (k, j): gap k of the current block, height 0 <= j < k
//   markov     countdown word: 1 at section visits, then k, k-1, ..., 2
//   event      Y_n = 1 at section visits
//   increment  N_n = # visits among indices 0..n-1 (partial sums of Y)
// Every orbit starts on the section: index 0 is a visit, j_0 = 0, m_0 = 1.
// ---------------------------------------------------------------------------

struct TowerState {
  long k;
  long j;
};

struct ShiftOrbit {
  std::vector<long> gaps;      // consumed gap word, one entry per block
  std::vector<TowerState> tower;
  std::vector<long> markov;
  std::vector<int> event;
  std::vector<long> increment;  // one entry longer: N_0 = 0 through N_n
};

// n_steps entries of every model from a shared gap stream (integer-valued
// laws only: pareto_integer, geometric, table)
ShiftOrbit simulate_shift_orbit(const GapLaw& law, long n_steps, RngStream& g);

// single-step dynamics; next_gap is consulted exactly when a block ends
TowerState tower_step(const TowerState& s, const std::function<long()>& next_gap);
long markov_step(long m, const std::function<long()>& next_gap);

// ---------------------------------------------------------------------------
// Conjugacy maps between the models, acting on finite windows.  Pointwise
// maps (tower -> markov/event, markov -> event, event <-> increment) keep
// the window length.  Maps that must reconstruct block structure (-> tower,
// event -> markov) return the longest resolvable prefix -- a window can
// never close its final block, so the output is typically shorter -- and
// throw std::domain_error when even the first position is unresolved
// (window does not start at an event, or contains none).
// ---------------------------------------------------------------------------

std::vector<long> tower_to_markov(const std::vector<TowerState>& w);
std::vector<int> tower_to_event(const std::vector<TowerState>& w);
std::vector<int> markov_to_event(const std::vector<long>& w);
std::vector<long> event_to_increment(const std::vector<int>& y);
std::vector<int> increment_to_event(const std::vector<long>& n);
std::vector<long> event_to_markov(const std::vector<int>& y);
std::vector<TowerState> event_to_tower(const std::vector<int>& y);
std::vector<TowerState> markov_to_tower(const std::vector<long>& w);

// ---------------------------------------------------------------------------
// Discrete order-two averages along a markov-model orbit
//   form_i  = (1/log k)      sum_{n=1}^{k} S_n(phi) / (ahat(n) n)
//   form_ii = (1/log ahat(k)) sum_{n=1}^{k} phi(m_n) / ahat(n)
// with S_n(phi) = phi(m_0) + ... + phi(m_{n-1}).  Both settle at the same
// limit for observables of the countdown state.
// ---------------------------------------------------------------------------

struct OrderTwoPair {
  double form_i;
  double form_ii;
};

// word-based variant; needs word length >= k+1 (form_ii reads m_k)
OrderTwoPair discrete_order_two(const std::vector<long>& markov_word,
                                const std::function<double(long)>& phi, long k,
                                const std::function<double(double)>& ahat);

// streaming variant for long horizons: generates the countdown word on the
// fly from the law's gap stream and uses the law's own normalizer
OrderTwoPair discrete_order_two_run(const GapLaw& law,
                                    const std::function<double(long)>& phi,
                                    long k, RngStream& g);

// visit counts of countdown states 1..max_state over n_steps, streamed in
// O(1) memory (occupation ratios visits(m)/visits(1) estimate pi_m)
std::vector<long> occupation_counts(const GapLaw& law, long n_steps,
                                    long max_state, RngStream& g);

// orbit dump, one row per index: n, state, Y_n, N_n
void dump_orbit_csv(std::ostream& os, const ShiftOrbit& orbit);

}  // namespace ergoflow
