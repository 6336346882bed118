#include "ergoflow/lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ergoflow/cocycle.hpp"
#include "ergoflow/fractal.hpp"
#include "ergoflow/renewal.hpp"
#include "ergoflow/shift_models.hpp"
#include "ergoflow/stable.hpp"

namespace ergoflow {

namespace {

// %.17g round-trips doubles exactly, which is what makes checkpoint resume
// and the CSV/JSON emitters reproduce in-memory values bit for bit
std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const ExperimentInfo* find_info(const std::string& name) {
  for (const ExperimentInfo& info : experiment_registry())
    if (info.name == name) return &info;
  return nullptr;
}

GapLaw law_from(const LabConfig& cfg) {
  if (cfg.law == "pareto") return GapLaw::pareto_cont(cfg.alpha);
  if (cfg.law == "pareto-int") return GapLaw::pareto_int(cfg.alpha);
  if (cfg.law == "stable") return GapLaw::stable(canonical_spec(cfg.alpha));
  if (cfg.law == "geometric") return GapLaw::geometric_law(cfg.q);
  throw std::invalid_argument("unknown law '" + cfg.law + "'");
}

GapPMF pmf_from(const LabConfig& cfg, std::size_t K) {
  if (cfg.law == "pareto-int") return GapPMF::pareto_int(cfg.alpha, K);
  if (cfg.law == "geometric") return GapPMF::geometric(cfg.q, K);
  throw std::invalid_argument("law '" + cfg.law +
                              "' has no countdown-chain form (integer laws only)");
}

EnsembleResult empty_ensemble() {
  EnsembleResult r;
  r.mean = std::nan("");
  r.se = std::nan("");
  r.se_defined = false;
  r.target = std::nan("");
  r.z = std::nan("");
  return r;
}

LabResult base_result(const LabConfig& cfg) {
  LabResult res;
  res.experiment = cfg.experiment;
  res.alpha = cfg.alpha;
  res.horizon = cfg.horizon;
  res.seed = cfg.seed;
  res.ensemble = empty_ensemble();
  return res;
}

// route through the checkpoint writer only when a path was supplied; the tag
// keys the checkpoint to this experiment so a stale file is never resumed
EnsembleResult lab_ensemble(const LabConfig& cfg, const std::string& ckpt,
                            double target,
                            const std::function<double(RngStream&)>& fn) {
  if (ckpt.empty())
    return run_ensemble(fn, cfg.n_paths, cfg.seed, cfg.workers, target);
  std::string tag = cfg.experiment + " alpha=" + fmt17(cfg.alpha) +
                    " horizon=" + fmt17(cfg.horizon);
  return run_ensemble_checkpointed(fn, cfg.n_paths, cfg.seed, cfg.workers,
                                   target, ckpt, tag);
}

// ---------------------------------------------------------------------------
// experiment runners

LabResult run_constants(const LabConfig& cfg) {
  LabResult res = base_result(cfg);
  ConstantTable tab = constants(cfg.alpha);
  double c_gamma = 1.0 / (std::tgamma(1.0 - cfg.alpha) * std::tgamma(1.0 + cfg.alpha));
  res.extras = {
      {"lambda", canonical_lambda(cfg.alpha)},
      {"c", tab.c},
      {"c_alpha", tab.c_alpha},
      {"c_check", tab.c_check},
      {"c_hat", tab.c_hat},
      {"c_tilde", tab.c_tilde},
      {"residual_c", std::abs(tab.c - c_gamma)},
      {"residual_chain", std::abs(tab.c_alpha - tab.c_hat / tab.c_tilde)},
  };
  return res;
}

LabResult run_ml_mean(const LabConfig& cfg, const std::string& ckpt) {
  LabResult res = base_result(cfg);
  StableSpec spec = canonical_spec(cfg.alpha);
  double t = cfg.horizon;
  long long chunk = std::max(1LL, std::llround(cfg.n_samples / cfg.n_paths));
  double target = ml_mean(spec) * std::pow(t, cfg.alpha);
  res.ensemble = lab_ensemble(cfg, ckpt, target, [&](RngStream& g) {
    double acc = 0.0;
    for (long long j = 0; j < chunk; ++j) acc += sample_ml(g, spec, t);
    return acc / static_cast<double>(chunk);
  });
  res.extras = {{"chunk", static_cast<double>(chunk)},
                {"ml_var", ml_variance(spec)}};
  return res;
}

LabResult run_return_sequence(const LabConfig& cfg, const std::string& ckpt) {
  LabResult res = base_result(cfg);
  GapLaw law = law_from(cfg);
  NormalizerTriple norm = normalizers(law);
  double n = cfg.horizon;
  double target = constants(cfg.alpha).c;
  res.ensemble = lab_ensemble(cfg, ckpt, target, [&](RngStream& g) {
    PiecewisePath N = simulate_renewal(g, law, Horizon::by_time(n));
    return N(n) / norm.ahat(n);
  });
  res.extras = {{"ahat_n", norm.ahat(n)}};
  return res;
}

LabResult run_logavg_renewal(const LabConfig& cfg, const std::string& ckpt) {
  LabResult res = base_result(cfg);
  GapLaw law = law_from(cfg);
  NormalizerTriple norm = normalizers(law);
  double T = cfg.horizon;
  double target = constants(cfg.alpha).c;
  // pure-power normalizer goes through the closed-form block sum; the others
  // take the quadrature route against the law's exact ahat
  bool power = law.kind == GapKind::pareto_continuous;
  res.ensemble = lab_ensemble(cfg, ckpt, target, [&](RngStream& g) {
    PiecewisePath N = simulate_renewal(g, law, Horizon::by_time(T));
    if (power) return log_average_power(N, cfg.alpha, T).value;
    return log_average_general(N, norm.ahat, T, 1e-9).value;
  });
  return res;
}

LabResult run_logavg_discrete(const LabConfig& cfg, const std::string& ckpt) {
  LabResult res = base_result(cfg);
  GapLaw law = law_from(cfg);
  long k = static_cast<long>(std::llround(cfg.horizon));
  long st = cfg.state;
  double pi = invariant_vector(pmf_from(cfg, static_cast<std::size_t>(st) + 2))
      [static_cast<std::size_t>(st) - 1];
  double target = constants(cfg.alpha).c * pi;
  bool form_one = cfg.form == "i";
  auto phi = [st](long m) { return m == st ? 1.0 : 0.0; };
  res.ensemble = lab_ensemble(cfg, ckpt, target, [&](RngStream& g) {
    OrderTwoPair pair = discrete_order_two_run(law, phi, k, g);
    return form_one ? pair.form_i : pair.form_ii;
  });
  res.extras = {{"pi_state", pi}, {"form", form_one ? 1.0 : 2.0}};
  return res;
}

// Shared by the two qualitative coupling probes.  The coupled window must
// reach e^T (plus the unit shift the horocycle probe looks across), so the
// event count is sized from Z(n) ~ n^(1/alpha) Z(1) with Z(1) >= 0.02 --
// P(Z(1) < 0.02) is ~4e-10 at alpha = 1/2 -- and a doubling retry covers the
// residual tail.
LabResult run_coupling(const LabConfig& cfg, const std::string& ckpt,
                       bool horocycle) {
  LabResult res = base_result(cfg);
  StableSpec spec = canonical_spec(cfg.alpha);
  double T = cfg.horizon;
  double need = std::exp(T) + 2.0;
  double n_raw = std::ceil(std::pow(need / 0.02, cfg.alpha)) + 8.0;
  if (!(n_raw <= 2e6))
    throw std::invalid_argument(
        "coupling horizon too large: the coupled window needs ~" +
        fmt17(n_raw) + " renewal events (cap 2e6); reduce --horizon");
  long n0 = static_cast<long>(n_raw);
  const int steps_per_unit = 8;
  res.ensemble = lab_ensemble(cfg, ckpt, std::nan(""), [&](RngStream& g) {
    long n = n0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      CoupledPair cp = coupled_pair(g, spec, n, steps_per_unit);
      if (cp.zhat.window().hi >= need) {
        if (horocycle) return cesaro_horocycle_check(cp.zhat, 1.0, cfg.alpha, T);
        return cesaro_orbit_distance(cp.zhat, cp.nbar, cfg.alpha, T);
      }
      n *= 2;
    }
    throw std::runtime_error(
        "coupled window missed the horizon four times in a row");
  });
  res.extras = {{"n_events", static_cast<double>(n0)},
                {"steps_per_unit", static_cast<double>(steps_per_unit)}};
  return res;
}

LabResult run_cocycle_integrals(const LabConfig& cfg, const std::string& ckpt) {
  LabResult res = base_result(cfg);
  GapLaw law = law_from(cfg);
  Cocycle cnt = counting_cocycle();
  int ns = static_cast<int>(std::llround(cfg.n_samples));

  // the cocycle law on a 50 x 20 sample/time grid, |Phi(x,0)| included
  std::vector<PiecewisePath> xs;
  RngStream gx(cfg.seed, 900001);
  for (int i = 0; i < 50; ++i)
    xs.push_back(simulate_renewal(gx, law, Horizon::by_time(30.0)));
  std::vector<std::pair<double, double>> st;
  RngStream gs(cfg.seed, 900002);
  for (int i = 0; i < 20; ++i) st.push_back({10.0 * gs.u01(), 10.0 * gs.u01()});
  double residual = verify_cocycle_law(cnt, xs, st);

  // the section integral of the counting cocycle is 1 summand by summand
  IntegralEstimate cs =
      integral_cross_section(cnt, renewal_section(law, 2.0), ns, cfg.seed + 7);

  // flow averages at three horizons; agreement across t is the point
  const double ts[3] = {0.5, 1.0, 2.0};
  McEstimate flows[3];
  for (int j = 0; j < 3; ++j)
    flows[j] = suspension_flow_average(cnt, law, ts[j], ns, cfg.seed + 11 + j);

  double t0 = cfg.horizon;
  int per_path = std::max(200, ns / 10);
  res.ensemble = lab_ensemble(cfg, ckpt, 1.0, [&](RngStream& g) {
    return suspension_flow_average(cnt, law, t0, per_path, g.raw()).mean;
  });
  if (cs.diverged) res.status = "diverged";
  res.extras = {
      {"law_residual", residual},
      {"cross_mean", cs.mean},
      {"cross_se", cs.se},
      {"cross_diverged", cs.diverged ? 1.0 : 0.0},
      {"flow_mean_05", flows[0].mean},
      {"flow_se_05", flows[0].se},
      {"flow_mean_1", flows[1].mean},
      {"flow_se_1", flows[1].se},
      {"flow_mean_2", flows[2].mean},
      {"flow_se_2", flows[2].se},
  };
  return res;
}

LabResult run_hopf_ratio(const LabConfig& cfg, const std::string& ckpt) {
  LabResult res = base_result(cfg);
  GapLaw law = law_from(cfg);
  long steps = static_cast<long>(std::llround(cfg.horizon));
  long st = cfg.state;
  std::vector<double> pi =
      invariant_vector(pmf_from(cfg, static_cast<std::size_t>(st) + 2));
  double target = pi[static_cast<std::size_t>(st) - 1] / pi[0];
  res.ensemble = lab_ensemble(cfg, ckpt, target, [&](RngStream& g) {
    std::vector<long> counts = occupation_counts(law, steps, std::max(st, 2L), g);
    long hits = counts[static_cast<std::size_t>(st) - 1];
    if (counts[0] == 0 || hits == 0) return std::nan("");
    return static_cast<double>(hits) / static_cast<double>(counts[0]);
  });
  for (double v : res.ensemble.values)
    if (!std::isfinite(v)) res.status = "underpowered";
  res.extras = {{"pi_ratio", target}};
  return res;
}

LabResult run_shift_isomorphism(const LabConfig& cfg, const std::string& ckpt) {
  LabResult res = base_result(cfg);
  GapLaw law = law_from(cfg);
  long steps = static_cast<long>(std::llround(cfg.horizon));
  res.ensemble = lab_ensemble(cfg, ckpt, 1.0, [&](RngStream& g) {
    ShiftOrbit o = simulate_shift_orbit(law, steps, g);
    bool ok = tower_to_markov(o.tower) == o.markov &&
              tower_to_event(o.tower) == o.event &&
              markov_to_event(o.markov) == o.event &&
              event_to_increment(o.event) == o.increment &&
              increment_to_event(o.increment) == o.event;
    // the structural inverses resolve the longest determined prefix; that
    // prefix must sit inside the simulated word and must not be empty
    std::vector<long> m2 = event_to_markov(o.event);
    std::vector<TowerState> t2 = event_to_tower(o.event);
    std::vector<TowerState> t3 = markov_to_tower(o.markov);
    auto prefix_of = [](const auto& p, const auto& w, auto eq) {
      return !p.empty() && p.size() <= w.size() &&
             std::equal(p.begin(), p.end(), w.begin(), eq);
    };
    auto eq_long = [](long a, long b) { return a == b; };
    auto eq_tower = [](const TowerState& a, const TowerState& b) {
      return a.k == b.k && a.j == b.j;
    };
    ok = ok && prefix_of(m2, o.markov, eq_long) &&
         prefix_of(t2, o.tower, eq_tower) && prefix_of(t3, o.tower, eq_tower);
    return ok ? 1.0 : 0.0;
  });
  res.extras = {
      {"pi_residual", invariant_residual(pmf_from(cfg, 10000))},
      {"mass_geometric", total_mass(GapPMF::geometric(0.5, 64)).value},
      {"mass_pareto_diverged",
       total_mass(GapPMF::pareto_int(cfg.alpha, 64)).diverged ? 1.0 : 0.0},
  };
  return res;
}

LabResult run_order2_density(const LabConfig& cfg, const std::string& ckpt) {
  LabResult res = base_result(cfg);
  StableSpec spec = canonical_spec(cfg.alpha);
  double S = cfg.horizon;
  double target = constants(cfg.alpha).c;
  // resolve the sampler well below e^-S: with this s_min the first positive
  // breakpoint Z(s_min) exceeds e^-S only with probability ~1e-7 per path,
  // and the resample loop absorbs those
  double s_min = std::min(1e-8, 1e-7 * std::exp(-cfg.alpha * S));
  res.ensemble = lab_ensemble(cfg, ckpt, target, [&](RngStream& g) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      try {
        return order_two_density(sample_zhat_path(g, spec, s_min), cfg.alpha, S);
      } catch (const std::domain_error&) {
        // unresolved window: redraw from the same stream
      }
    }
    throw std::runtime_error("order2-density: sampler failed to resolve e^-S");
  });
  res.extras = {{"s_min", s_min}};
  return res;
}

LabResult run_moment_convergence(const LabConfig& cfg) {
  LabResult res = base_result(cfg);
  GapLaw law = law_from(cfg);
  StableSpec spec = canonical_spec(cfg.alpha);
  double k = cfg.horizon;
  int n = static_cast<int>(std::llround(cfg.n_samples));
  const double p = 1.0;
  MomentRow row = moment_convergence(law, spec, {k}, p, n, cfg.seed).front();
  double z = (row.lhs.mean - row.rhs.mean) / std::hypot(row.lhs.se, row.rhs.se);
  res.extras = {
      {"p", p},
      {"lhs_mean", row.lhs.mean},
      {"lhs_se", row.lhs.se},
      {"rhs_mean", row.rhs.mean},
      {"rhs_se", row.rhs.se},
      {"z_joint", z},
      {"moment_exact", stable_negative_moment(spec, p)},
  };
  return res;
}

LabResult run_cover_diagnostic(const LabConfig& cfg, const std::string& ckpt) {
  LabResult res = base_result(cfg);
  // unit-lambda spec: the exact-measure comparison c_tilde * t is stated in
  // that normalization, not the canonical one
  StableSpec spec{cfg.alpha, 1.0};
  double t = cfg.horizon;
  int n_grid = static_cast<int>(std::llround(cfg.n_samples));
  double target = constants(cfg.alpha).c_tilde * t;
  auto gauge = [a = cfg.alpha](double d) { return gauge_psi(d, a).value; };
  for (int e = 8; e <= 14; ++e) {
    double delta = std::ldexp(1.0, -e);
    auto fn = [&](RngStream& g) {
      std::vector<double> pts = subordinator_range_points(g, spec, t, n_grid);
      return hausdorff_cover_estimate(pts, gauge, delta);
    };
    // every scale reruns the same per-path streams, so the seven estimates
    // are common-random-number comparable; the finest carries the ensemble
    EnsembleResult r =
        e == 14 ? lab_ensemble(cfg, ckpt, target, fn)
                : run_ensemble(fn, cfg.n_paths, cfg.seed, cfg.workers, target);
    res.extras.push_back({"mean_2^-" + std::to_string(e), r.mean});
    if (e == 14) res.ensemble = r;
  }
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// registry / defaults

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> reg = {
      {"constants", "alpha",
       "identity residuals: c = sin(πα)/(πα) = 1/(Γ(1-α)Γ(1+α)), c_α = ĉ_α/c̃_α",
       true, 1e-12},
      {"ml-mean", "alpha, n-samples, paths, seed",
       "E[Ẑ(1)] = c = sin(πα)/(πα) at the canonical scale", true, 0.01},
      {"return-sequence", "alpha, law, horizon=n, paths, seed",
       "E[N(n)]/â(n) → c = sin(πα)/(πα)", true, 0.03},
      {"logavg-renewal", "alpha, law, horizon=T, paths, seed",
       "order-two log average of N(t)/â(t) → c = sin(πα)/(πα)", true, 0.05},
      {"logavg-discrete", "alpha, law, horizon=k, form, state, paths, seed",
       "discrete order-two averages → c·π_state", true, 0.05},
      {"coupling-cesaro", "alpha, horizon=T, paths, seed",
       "Cesàro distance to the self-similar rescaling shrinks with T (qualitative)",
       false, 0.0},
      {"horocycle-decay", "alpha, horizon=T, paths, seed",
       "Cesàro increment-shift discrepancy at r = 1 shrinks with T (qualitative)",
       false, 0.0},
      {"cocycle-integrals", "law, q, horizon=t, n-samples, paths, seed",
       "cocycle law holds; cross-section integral = 1 exactly; flow averages t-independent",
       true, 1e-9},
      {"hopf-ratio", "alpha, law, horizon=steps, state, seed",
       "occupation ratio state/1 → π_state/π_1 (ratio ergodic theorem)", true,
       0.05},
      {"shift-isomorphism", "alpha, law, horizon=steps, paths, seed",
       "exact conjugacy between the four models; πP = π; geometric(1/2) mass = 2",
       true, 1e-12},
      {"order2-density", "alpha, horizon=S, paths, seed",
       "order-two density of the inverse-process range → c = sin(πα)/(πα)",
       true, 0.10},
      {"moment-convergence", "alpha, law, horizon=k, n-samples, seed",
       "E[(a(k)/S_k)^p] matches E[Z(1)^-p] within joint-SE units", true, 3.0},
      {"cover-diagnostic", "alpha, horizon=t, n-samples=grid, paths, seed",
       "ψ-cover sums of the range within one order of magnitude of c̃_α·t",
       true, 10.0},
  };
  return reg;
}

LabConfig resolve_defaults(LabConfig cfg) {
  const ExperimentInfo* info = find_info(cfg.experiment);
  if (!info)
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
  const std::string& e = cfg.experiment;

  if (cfg.alpha == 0.0) cfg.alpha = e == "hopf-ratio" ? 0.6 : 0.5;
  if (cfg.q == 0.0) cfg.q = 0.5;
  if (cfg.law.empty()) {
    if (e == "logavg-discrete" || e == "hopf-ratio" || e == "shift-isomorphism")
      cfg.law = "pareto-int";
    else if (e == "cocycle-integrals")
      cfg.law = "geometric";
    else
      cfg.law = "pareto";
  }
  if (cfg.horizon == 0.0) {
    if (e == "ml-mean" || e == "cocycle-integrals" || e == "cover-diagnostic")
      cfg.horizon = 1.0;
    else if (e == "return-sequence" || e == "logavg-discrete")
      cfg.horizon = 1e6;
    else if (e == "logavg-renewal")
      cfg.horizon = 1e8;
    else if (e == "coupling-cesaro" || e == "horocycle-decay")
      cfg.horizon = 20.0;
    else if (e == "hopf-ratio")
      cfg.horizon = 1e7;
    else if (e == "shift-isomorphism" || e == "moment-convergence")
      cfg.horizon = 1e5;
    else if (e == "order2-density")
      cfg.horizon = 10.0;
  }
  if (cfg.n_paths == 0) {
    if (e == "return-sequence")
      cfg.n_paths = 500;
    else if (e == "order2-density")
      cfg.n_paths = 200;
    else if (e == "ml-mean" || e == "logavg-renewal" || e == "logavg-discrete" ||
             e == "coupling-cesaro" || e == "horocycle-decay")
      cfg.n_paths = 100;
    else if (e == "cocycle-integrals" || e == "cover-diagnostic")
      cfg.n_paths = 20;
    else if (e == "shift-isomorphism")
      cfg.n_paths = 3;
    else
      cfg.n_paths = 1;  // constants, hopf-ratio, moment-convergence
  }
  if (cfg.n_samples == 0.0) {
    if (e == "ml-mean")
      cfg.n_samples = 1e6;
    else if (e == "cocycle-integrals")
      cfg.n_samples = 2000;
    else if (e == "moment-convergence")
      cfg.n_samples = 1e5;
    else if (e == "cover-diagnostic")
      cfg.n_samples = 65536;
  }
  if (cfg.form.empty()) cfg.form = "ii";
  if (cfg.state == 0) cfg.state = e == "hopf-ratio" ? 2 : 1;
  if (cfg.format.empty())
    cfg.format = (e == "constants" || e == "moment-convergence") ? "json" : "csv";
  if (cfg.tol == 0.0) cfg.tol = info->default_tol;

  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0,1)");
  if (cfg.law != "pareto" && cfg.law != "pareto-int" && cfg.law != "stable" &&
      cfg.law != "geometric")
    throw std::invalid_argument("unknown law '" + cfg.law +
                                "' (pareto|pareto-int|stable|geometric)");
  if (!(cfg.q > 0.0 && cfg.q <= 1.0))
    throw std::invalid_argument("q must lie in (0,1]");
  if (cfg.form != "i" && cfg.form != "ii")
    throw std::invalid_argument("form must be 'i' or 'ii'");
  if (cfg.format != "csv" && cfg.format != "json")
    throw std::invalid_argument("format must be 'csv' or 'json'");
  if (cfg.n_paths < 1) throw std::invalid_argument("paths must be >= 1");
  if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (cfg.state < 1) throw std::invalid_argument("state must be >= 1");
  if (e != "constants" && !(cfg.horizon > 0.0 && std::isfinite(cfg.horizon)))
    throw std::invalid_argument("horizon must be positive");
  if (!(cfg.n_samples >= 0.0) || !std::isfinite(cfg.n_samples))
    throw std::invalid_argument("n-samples must be finite and nonnegative");
  if (info->checkable && !(cfg.tol > 0.0))
    throw std::invalid_argument("tol must be positive");
  return cfg;
}

// ---------------------------------------------------------------------------
// dispatch

LabResult run_experiment(const LabConfig& raw, const std::string& checkpoint_path) {
  LabConfig cfg = resolve_defaults(raw);
  const std::string& e = cfg.experiment;
  if (e == "constants") return run_constants(cfg);
  if (e == "ml-mean") return run_ml_mean(cfg, checkpoint_path);
  if (e == "return-sequence") return run_return_sequence(cfg, checkpoint_path);
  if (e == "logavg-renewal") return run_logavg_renewal(cfg, checkpoint_path);
  if (e == "logavg-discrete") return run_logavg_discrete(cfg, checkpoint_path);
  if (e == "coupling-cesaro") return run_coupling(cfg, checkpoint_path, false);
  if (e == "horocycle-decay") return run_coupling(cfg, checkpoint_path, true);
  if (e == "cocycle-integrals") return run_cocycle_integrals(cfg, checkpoint_path);
  if (e == "hopf-ratio") return run_hopf_ratio(cfg, checkpoint_path);
  if (e == "shift-isomorphism") return run_shift_isomorphism(cfg, checkpoint_path);
  if (e == "order2-density") return run_order2_density(cfg, checkpoint_path);
  if (e == "moment-convergence") return run_moment_convergence(cfg);
  if (e == "cover-diagnostic") return run_cover_diagnostic(cfg, checkpoint_path);
  throw std::invalid_argument("unknown experiment '" + e + "'");
}

// ---------------------------------------------------------------------------
// checks

std::optional<std::string> check_result(const LabConfig& raw,
                                        const LabResult& res) {
  LabConfig cfg = resolve_defaults(raw);
  const ExperimentInfo* info = find_info(cfg.experiment);
  if (!info->checkable)
    throw std::invalid_argument("experiment '" + cfg.experiment +
                                "' is qualitative; nothing to check");
  auto extra = [&](const std::string& key) {
    for (const auto& kv : res.extras)
      if (kv.first == key) return kv.second;
    throw std::runtime_error("result is missing extra '" + key + "'");
  };
  std::ostringstream why;
  const std::string& e = cfg.experiment;

  if (res.status != "ok") {
    why << "status '" << res.status << "'";
    return why.str();
  }

  if (e == "constants") {
    double worst = std::max(extra("residual_c"), extra("residual_chain"));
    if (!(worst <= cfg.tol)) {
      why << "identity residual " << worst << " exceeds " << cfg.tol;
      return why.str();
    }
    return std::nullopt;
  }

  if (e == "moment-convergence") {
    double z = extra("z_joint");
    if (!(std::abs(z) <= cfg.tol)) {
      why << "joint z-score " << z << " outside +-" << cfg.tol;
      return why.str();
    }
    return std::nullopt;
  }

  if (e == "cocycle-integrals") {
    if (!(extra("law_residual") <= cfg.tol)) {
      why << "cocycle law residual " << extra("law_residual") << " exceeds "
          << cfg.tol;
      return why.str();
    }
    if (!(std::abs(extra("cross_mean") - 1.0) <= 1e-12)) {
      why << "cross-section integral " << extra("cross_mean") << " is not 1";
      return why.str();
    }
    double cm = extra("cross_mean"), cse = extra("cross_se");
    const char* suffix[3] = {"05", "1", "2"};
    double m[3], s[3];
    for (int j = 0; j < 3; ++j) {
      m[j] = extra(std::string("flow_mean_") + suffix[j]);
      s[j] = extra(std::string("flow_se_") + suffix[j]);
      if (!(std::abs(m[j] - cm) <= 3.0 * std::hypot(s[j], cse) + 1e-12)) {
        why << "flow average at t index " << j << " (" << m[j]
            << ") disagrees with the cross-section integral " << cm;
        return why.str();
      }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (!(std::abs(m[i] - m[j]) <= 3.0 * std::hypot(s[i], s[j]) + 1e-12)) {
          why << "flow averages " << m[i] << " and " << m[j]
              << " disagree across horizons";
          return why.str();
        }
    return std::nullopt;
  }

  if (e == "shift-isomorphism") {
    for (std::size_t i = 0; i < res.ensemble.values.size(); ++i)
      if (res.ensemble.values[i] != 1.0) {
        why << "conjugacy mismatch on path " << i;
        return why.str();
      }
    if (!(extra("pi_residual") <= cfg.tol)) {
      why << "invariance residual " << extra("pi_residual") << " exceeds "
          << cfg.tol;
      return why.str();
    }
    if (extra("mass_geometric") != 2.0) {
      why << "geometric(1/2) invariant mass " << extra("mass_geometric")
          << " is not exactly 2";
      return why.str();
    }
    if (extra("mass_pareto_diverged") != 1.0) {
      why << "pareto-integer mass was not flagged divergent";
      return why.str();
    }
    return std::nullopt;
  }

  if (e == "cover-diagnostic") {
    double target = res.ensemble.target;
    for (const auto& kv : res.extras)
      if (kv.first.rfind("mean_2^-", 0) == 0)
        if (!(kv.second >= target / cfg.tol && kv.second <= target * cfg.tol)) {
          why << kv.first << " = " << kv.second << " leaves the band ["
              << target / cfg.tol << ", " << target * cfg.tol << "]";
          return why.str();
        }
    return std::nullopt;
  }

  // the remaining experiments compare the ensemble mean to its target at a
  // relative tolerance
  double target = res.ensemble.target;
  double mean = res.ensemble.mean;
  if (!std::isfinite(mean) || !std::isfinite(target)) {
    why << "mean or target undefined";
    return why.str();
  }
  double rel = std::abs(mean - target) / std::abs(target);
  if (!(rel <= cfg.tol)) {
    why << "mean " << mean << " misses target " << target << " by "
        << 100.0 * rel << "% (tol " << 100.0 * cfg.tol << "%)";
    return why.str();
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// emitters

std::string emit_csv(const LabResult& res) {
  std::ostringstream out;
  out << "experiment,alpha,horizon,path_id,value\n";
  const std::vector<double>& v = res.ensemble.values;
  for (std::size_t i = 0; i < v.size(); ++i)
    out << res.experiment << ',' << fmt17(res.alpha) << ',' << fmt17(res.horizon)
        << ',' << i << ',' << fmt17(v[i]) << '\n';
  if (!v.empty())
    out << res.experiment << ',' << fmt17(res.alpha) << ',' << fmt17(res.horizon)
        << ",summary," << fmt17(res.ensemble.mean) << '\n';
  return out.str();
}

std::string emit_json(const LabResult& res) {
  nlohmann::ordered_json j;
  j["experiment"] = res.experiment;
  j["alpha"] = res.alpha;
  j["horizon"] = res.horizon;
  j["seed"] = res.seed;
  j["status"] = res.status;
  // non-finite doubles have no JSON number form; null is their spelling here
  auto put = [](nlohmann::ordered_json& o, const std::string& k, double x) {
    if (std::isfinite(x))
      o[k] = x;
    else
      o[k] = nullptr;
  };
  nlohmann::ordered_json vals = nlohmann::ordered_json::array();
  for (double v : res.ensemble.values)
    vals.push_back(std::isfinite(v) ? nlohmann::ordered_json(v)
                                    : nlohmann::ordered_json(nullptr));
  j["values"] = std::move(vals);
  put(j, "mean", res.ensemble.mean);
  put(j, "se", res.ensemble.se);
  j["se_defined"] = res.ensemble.se_defined;
  put(j, "target", res.ensemble.target);
  put(j, "z", res.ensemble.z);
  nlohmann::ordered_json ex = nlohmann::ordered_json::object();
  for (const auto& kv : res.extras) put(ex, kv.first, kv.second);
  j["extras"] = std::move(ex);
  return j.dump(2) + "\n";
}

LabResult parse_json(const std::string& text) {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
  auto num = [](const nlohmann::ordered_json& v) {
    return v.is_number() ? v.get<double>() : std::nan("");
  };
  LabResult res;
  res.experiment = j.at("experiment").get<std::string>();
  res.alpha = j.at("alpha").get<double>();
  res.horizon = j.at("horizon").get<double>();
  res.seed = j.at("seed").get<std::uint64_t>();
  res.status = j.at("status").get<std::string>();
  for (const auto& v : j.at("values")) res.ensemble.values.push_back(num(v));
  res.ensemble.mean = num(j.at("mean"));
  res.ensemble.se = num(j.at("se"));
  res.ensemble.se_defined = j.at("se_defined").get<bool>();
  res.ensemble.target = num(j.at("target"));
  res.ensemble.z = num(j.at("z"));
  for (const auto& item : j.at("extras").items())
    res.extras.emplace_back(item.key(), num(item.value()));
  return res;
}

// ---------------------------------------------------------------------------
// checkpointed ensembles

EnsembleResult run_ensemble_checkpointed(
    const std::function<double(RngStream&)>& fn, int n_paths,
    std::uint64_t master_seed, int workers, double target,
    const std::string& checkpoint_path, const std::string& tag) {
  if (checkpoint_path.empty())
    return run_ensemble(fn, n_paths, master_seed, workers, target);
  if (n_paths < 1)
    throw std::invalid_argument("run_ensemble_checkpointed: n_paths >= 1");
  if (workers < 1)
    throw std::invalid_argument("run_ensemble_checkpointed: workers >= 1");

  std::string header = "# ergoflow-checkpoint " + tag +
                       " paths=" + std::to_string(n_paths) +
                       " seed=" + std::to_string(master_seed);
  std::vector<double> values(static_cast<std::size_t>(n_paths), 0.0);
  std::vector<char> have(static_cast<std::size_t>(n_paths), 0);

  // salvage the longest well-formed contiguous prefix of a matching file;
  // anything after a gap, parse error, or header mismatch is recomputed
  int salvaged = 0;
  {
    std::string content;
    {
      std::ifstream in(checkpoint_path, std::ios::binary);
      std::ostringstream slurp;
      slurp << in.rdbuf();
      content = slurp.str();
    }
    // a row is durable only once its newline hit the disk: a torn final
    // line would otherwise parse as a plausible but shortened value
    std::size_t last_nl = content.find_last_of('\n');
    content.resize(last_nl == std::string::npos ? 0 : last_nl + 1);
    std::istringstream in(content);
    std::string line;
    if (std::getline(in, line) && line == header) {
      while (salvaged < n_paths && std::getline(in, line)) {
        std::size_t comma = line.find(',');
        if (comma == std::string::npos) break;
        char* end = nullptr;
        long id = std::strtol(line.c_str(), &end, 10);
        if (id != salvaged || end != line.c_str() + comma) break;
        const char* vtxt = line.c_str() + comma + 1;
        double v = std::strtod(vtxt, &end);
        if (end == vtxt || *end != '\0') break;
        values[static_cast<std::size_t>(salvaged)] = v;
        have[static_cast<std::size_t>(salvaged)] = 1;
        ++salvaged;
      }
    }
  }

  std::ofstream out(checkpoint_path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write checkpoint file '" +
                             checkpoint_path + "'");
  out << header << '\n';
  for (int i = 0; i < salvaged; ++i)
    out << i << ',' << fmt17(values[static_cast<std::size_t>(i)]) << '\n';
  out.flush();

  // same work-stealing scheme as run_ensemble, plus a single mutex-serialized
  // writer that flushes the contiguous frontier as it fills in
  std::mutex mu;
  int frontier = salvaged;
  std::atomic<int> next{salvaged};
  auto work = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n_paths) return;
      RngStream g(master_seed, static_cast<std::uint64_t>(i));
      double v = fn(g);
      std::lock_guard<std::mutex> lock(mu);
      values[static_cast<std::size_t>(i)] = v;
      have[static_cast<std::size_t>(i)] = 1;
      while (frontier < n_paths && have[static_cast<std::size_t>(frontier)]) {
        out << frontier << ','
            << fmt17(values[static_cast<std::size_t>(frontier)]) << '\n';
        ++frontier;
      }
      out.flush();
    }
  };
  int spawn = std::min(workers, n_paths - salvaged);
  if (spawn <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int w = 0; w < spawn; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }

  EnsembleResult r;
  r.values = std::move(values);
  double sum = 0.0;
  for (double v : r.values) sum += v;
  r.mean = sum / n_paths;
  r.se_defined = n_paths > 1;
  if (r.se_defined) {
    double ss = 0.0;
    for (double v : r.values) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / (n_paths - 1) / n_paths);
  } else {
    r.se = std::nan("");
  }
  r.target = target;
  r.z = (std::isfinite(target) && r.se_defined && r.se > 0.0)
            ? (r.mean - target) / r.se
            : std::nan("");
  return r;
}

}  // namespace ergoflow
