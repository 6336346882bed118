// ergoflow command-line laboratory: every experiment in the registry as a
// subcommand, a JSON config channel underneath the flags, deterministic
// seeded ensembles, and optional self-checks against the declared targets.
//
// Exit codes: 0 run completed (divergence is reported in the status field,
// not the exit code), 1 --check missed its target, 2 usage or config error,
// 3 runtime or I/O failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergoflow/lab.hpp"

namespace {

using ergoflow::LabConfig;
using ergoflow::LabResult;

void print_registry() {
  const auto& reg = ergoflow::experiment_registry();
  int checkable = 0;
  std::cout << "experiments:\n";
  for (const auto& info : reg) {
    std::cout << "  " << info.name << "\n"
              << "      params: " << info.params << "\n"
              << "      target: " << info.target;
    if (info.checkable) {
      std::cout << "  [tol " << info.default_tol << "]";
      ++checkable;
    } else {
      std::cout << "  [qualitative]";
    }
    std::cout << "\n";
  }
  std::cout << reg.size() << " experiments (" << checkable << " checkable)\n";
}

// apply one config-file key; unknown keys and wrong types are hard errors so
// a typo never silently runs the default instead
bool apply_config_key(LabConfig& cfg, bool& seed_given, const std::string& key,
                      const nlohmann::json& v, const std::string& chosen) {
  try {
    if (key == "experiment") {
      std::string e = v.get<std::string>();
      if (e != chosen) {
        std::cerr << "ergoflow: config names experiment '" << e
                  << "' but the command line chose '" << chosen << "'\n";
        return false;
      }
      return true;
    }
    if (key == "alpha") {
      cfg.alpha = v.get<double>();
      return true;
    }
    if (key == "law") {
      cfg.law = v.get<std::string>();
      return true;
    }
    if (key == "q") {
      cfg.q = v.get<double>();
      return true;
    }
    if (key == "horizon" || key == "n") {
      cfg.horizon = v.get<double>();
      return true;
    }
    if (key == "paths") {
      cfg.n_paths = v.get<int>();
      return true;
    }
    if (key == "n-samples") {
      cfg.n_samples = v.get<double>();
      return true;
    }
    if (key == "form") {
      cfg.form = v.get<std::string>();
      return true;
    }
    if (key == "state") {
      cfg.state = v.get<int>();
      return true;
    }
    if (key == "seed") {
      cfg.seed = v.get<std::uint64_t>();
      seed_given = true;
      return true;
    }
    if (key == "workers") {
      cfg.workers = v.get<int>();
      return true;
    }
    if (key == "out") {
      cfg.out = v.get<std::string>();
      return true;
    }
    if (key == "format") {
      cfg.format = v.get<std::string>();
      return true;
    }
    if (key == "check") {
      cfg.check = v.get<bool>();
      return true;
    }
    if (key == "tol") {
      cfg.tol = v.get<double>();
      return true;
    }
  } catch (const nlohmann::json::exception&) {
    std::cerr << "ergoflow: config key '" << key << "' has the wrong type\n";
    return false;
  }
  std::cerr << "ergoflow: unknown config key '" << key << "'\n";
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ergoflow: renewal flows, stable subordinators, and their order-two "
      "ergodic theory"};
  app.require_subcommand(1);

  LabConfig flag;  // raw flag values; presence is decided by count() below
  std::string config_path;
  bool check_flag = false;
  std::string run_name;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--alpha", flag.alpha, "stability index in (0,1)");
    sub->add_option("--law", flag.law,
                    "gap law: pareto|pareto-int|stable|geometric");
    sub->add_option("--q", flag.q, "geometric gap parameter");
    sub->add_option("-T,--horizon,--n", flag.horizon,
                    "horizon: T, n, k, or S depending on the experiment");
    sub->add_option("--paths", flag.n_paths, "ensemble size");
    sub->add_option("--n-samples", flag.n_samples,
                    "samples per estimate where applicable");
    sub->add_option("--form", flag.form, "discrete average form: i|ii");
    sub->add_option("--state", flag.state, "countdown state under the indicator");
    sub->add_option("--seed", flag.seed,
                    "master seed (ERGOFLOW_SEED is the fallback)");
    sub->add_option("--workers", flag.workers, "worker threads over path indices");
    sub->add_option("--out", flag.out,
                    "write the result here (checkpoints at <out>.partial)");
    sub->add_option("--format", flag.format, "output format: csv|json");
    sub->add_flag("--check", check_flag,
                  "compare the result against the declared target");
    sub->add_option("--tol", flag.tol, "check tolerance (registry default)");
    sub->add_option("--config", config_path,
                    "JSON config file; explicit flags override its keys");
  };

  const auto& registry = ergoflow::experiment_registry();
  std::vector<CLI::App*> exp_subs;
  exp_subs.reserve(registry.size());
  for (const auto& info : registry) {
    CLI::App* sub = app.add_subcommand(info.name, info.target);
    add_common(sub);
    exp_subs.push_back(sub);
  }
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment by name");
  run_cmd->add_option("experiment", run_name, "experiment name")->required();
  add_common(run_cmd);
  CLI::App* list_cmd =
      app.add_subcommand("list", "print the experiment registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list_cmd->parsed()) {
    print_registry();
    return 0;
  }

  CLI::App* active = run_cmd->parsed() ? run_cmd : nullptr;
  std::string chosen = run_name;
  for (std::size_t i = 0; i < exp_subs.size(); ++i)
    if (exp_subs[i]->parsed()) {
      active = exp_subs[i];
      chosen = registry[i].name;
    }

  LabConfig cfg;
  cfg.experiment = chosen;
  bool seed_given = false;

  if (active->count("--config") > 0) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "ergoflow: cannot open config file '" << config_path << "'\n";
      return 2;
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "ergoflow: config file '" << config_path
                << "' is not valid JSON: " << e.what() << "\n";
      return 2;
    }
    if (!j.is_object()) {
      std::cerr << "ergoflow: config file must hold a JSON object\n";
      return 2;
    }
    for (const auto& item : j.items())
      if (!apply_config_key(cfg, seed_given, item.key(), item.value(), chosen))
        return 2;
  }

  // explicit flags win over config keys
  if (active->count("--alpha")) cfg.alpha = flag.alpha;
  if (active->count("--law")) cfg.law = flag.law;
  if (active->count("--q")) cfg.q = flag.q;
  if (active->count("--horizon")) cfg.horizon = flag.horizon;
  if (active->count("--paths")) cfg.n_paths = flag.n_paths;
  if (active->count("--n-samples")) cfg.n_samples = flag.n_samples;
  if (active->count("--form")) cfg.form = flag.form;
  if (active->count("--state")) cfg.state = flag.state;
  if (active->count("--seed")) {
    cfg.seed = flag.seed;
    seed_given = true;
  }
  if (active->count("--workers")) cfg.workers = flag.workers;
  if (active->count("--out")) cfg.out = flag.out;
  if (active->count("--format")) cfg.format = flag.format;
  if (active->count("--check")) cfg.check = check_flag;
  if (active->count("--tol")) cfg.tol = flag.tol;

  if (!seed_given) {
    if (const char* env = std::getenv("ERGOFLOW_SEED")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (end == env || *end != '\0') {
        std::cerr << "ergoflow: ERGOFLOW_SEED='" << env
                  << "' is not an unsigned integer\n";
        return 2;
      }
      cfg.seed = static_cast<std::uint64_t>(v);
    }
  }

  try {
    cfg = ergoflow::resolve_defaults(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "ergoflow: " << e.what() << "\n";
    return 2;
  }

  LabResult res;
  std::string ckpt = cfg.out.empty() ? "" : cfg.out + ".partial";
  try {
    res = ergoflow::run_experiment(cfg, ckpt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "ergoflow: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "ergoflow: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ergoflow: " << e.what() << "\n";
    return 3;
  }

  std::string text =
      cfg.format == "json" ? ergoflow::emit_json(res) : ergoflow::emit_csv(res);
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.out, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "ergoflow: cannot open '" << cfg.out << "' for writing\n";
      return 3;
    }
    out << text;
    out.flush();
    if (!out.good()) {
      std::cerr << "ergoflow: short write to '" << cfg.out << "'\n";
      return 3;
    }
    std::cerr << "wrote " << cfg.out << "\n";
  }
  if (res.status != "ok") std::cerr << "status: " << res.status << "\n";

  if (cfg.check) {
    std::optional<std::string> verdict;
    try {
      verdict = ergoflow::check_result(cfg, res);
    } catch (const std::invalid_argument& e) {
      std::cerr << "ergoflow: " << e.what() << "\n";
      return 2;
    }
    if (verdict.has_value()) {
      std::cerr << "check failed: " << *verdict << "\n";
      return 1;
    }
    std::cerr << "check passed\n";
  }
  return 0;
}
