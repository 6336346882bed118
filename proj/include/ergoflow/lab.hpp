#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ergoflow/estimators.hpp"
#include "ergoflow/rng.hpp"

namespace ergoflow {

// Run configuration for one named experiment.  Zero / empty fields mean "not
// set": resolve_defaults fills them from the experiment registry, so the
// stored values always reflect what actually ran.
struct LabConfig {
  std::string experiment;
  double alpha = 0.0;
  std::string law;         // pareto | pareto-int | stable | geometric
  double q = 0.0;          // geometric gap parameter
  double horizon = 0.0;    // T, n, k, or S -- per experiment
  int n_paths = 0;
  double n_samples = 0.0;  // per-side / total sample counts where applicable
  std::string form;        // logavg-discrete: "i" or "ii"
  int state = 0;           // target state for the discrete experiments
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;         // result file ("" = stdout, no checkpoint)
  std::string format;      // csv | json
  bool check = false;
  double tol = 0.0;
};

// Completed run: ensemble values (empty for scalar experiments) plus named
// scalar outputs.  status stays "ok" unless a divergence or power problem
// was detected -- those report, they do not fail the run.
struct LabResult {
  std::string experiment;
  double alpha = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 1;
  std::string status = "ok";
  EnsembleResult ensemble{};
  std::vector<std::pair<std::string, double>> extras;
};

// registry row: defaults, the target's identification, and whether --check
// is meaningful (the decay experiments are qualitative; see the acceptance
// suite for their trend checks)
struct ExperimentInfo {
  std::string name;
  std::string params;
  std::string target;
  bool checkable;
  double default_tol;
};
const std::vector<ExperimentInfo>& experiment_registry();

// fill unset fields with the experiment's registry defaults; throws
// std::invalid_argument for unknown experiment / law / form / format
LabConfig resolve_defaults(LabConfig cfg);

// Run the experiment.  A nonempty checkpoint_path makes the main ensemble
// flush "path_id,value" rows as the finished prefix grows and resume from an
// existing file with a matching header (mismatched headers are discarded).
LabResult run_experiment(const LabConfig& cfg,
                         const std::string& checkpoint_path = "");

// --check verdict for a completed run: empty optional on pass, message on
// failure; throws std::invalid_argument for non-checkable experiments
std::optional<std::string> check_result(const LabConfig& cfg,
                                        const LabResult& res);

// CSV: header experiment,alpha,horizon,path_id,value; one row per ensemble
// value, a summary row with the mean, then one row per extra.  JSON carries
// the full result and parse_json inverts it (NaN fields travel as null).
std::string emit_csv(const LabResult& res);
std::string emit_json(const LabResult& res);
LabResult parse_json(const std::string& text);

// run_ensemble with incremental persistence: identical values and statistics,
// plus checkpoint rows trusted on resume so finished paths are never redone.
// The tag goes into the checkpoint header; a file whose header does not match
// (tag, n_paths, seed) is discarded rather than resumed.
EnsembleResult run_ensemble_checkpointed(
    const std::function<double(RngStream&)>& fn, int n_paths,
    std::uint64_t master_seed, int workers, double target,
    const std::string& checkpoint_path, const std::string& tag = "");

}  // namespace ergoflow
