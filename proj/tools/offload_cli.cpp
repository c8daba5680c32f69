// Command line front end for the offloading experiments.
#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "offload/errors.hpp"
#include "offload/harness.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kNumerical = 3 };

struct Options {
  std::string config_path;
  std::string seeds = "1";
  std::string out_dir;
  std::vector<std::string> overrides;
  std::vector<std::string> policies;
  std::string kind;
};

// Each verb has a default experiment and the kinds it may be switched to.
struct Verb {
  const char* name;
  const char* help;
  const char* default_kind;
  std::vector<std::string> allowed;
};

const std::vector<Verb> kVerbs = {
    {"stackelberg", "pricing game: fixed-FA scan or full best-response iteration",
     "stackelberg_converge", {"stackelberg_converge", "stackelberg_fixed_fa"}},
    {"auction", "double Dutch auction IR/IC sweep with an audit log", "ir_ic_sweep",
     {"ir_ic_sweep"}},
    {"train", "train the diffusion policy on the auction MDP", "drl_train", {"drl_train"}},
    {"evaluate", "compare policies on paired seeds", "welfare_compare",
     {"welfare_compare", "cost_compare"}},
    {"sweep", "run any experiment named by --kind or experiment.kind", "", {}},
};

int run(const Verb& verb, const Options& opt) {
  offload::Config config =
      opt.config_path.empty() ? offload::Config{} : offload::Config::from_file(opt.config_path);
  for (const auto& o : opt.overrides) config.apply_override(o);

  std::string kind = opt.kind;
  if (kind.empty()) kind = *verb.default_kind ? verb.default_kind : config.text("experiment.kind");
  offload::ExperimentConfig ec;
  ec.kind = offload::experiment_from_name(kind);
  if (!verb.allowed.empty() &&
      std::find(verb.allowed.begin(), verb.allowed.end(), kind) == verb.allowed.end()) {
    throw offload::ConfigError(std::string("verb '") + verb.name + "' cannot run '" + kind + "'");
  }
  ec.seeds = offload::parse_seeds(opt.seeds);
  ec.out_dir = opt.out_dir;
  ec.policies = opt.policies;
  ec.config = config;

  offload::ExperimentOutput out = offload::run_experiment(ec);
  if (!ec.out_dir.empty()) offload::write_outputs(out, ec.kind, ec.out_dir);
  std::cout << offload::table_csv(out.summary);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agentic offloading: Stackelberg pricing and double Dutch auctions"};
  app.require_subcommand(1);
  Options opt;
  const Verb* chosen = nullptr;
  for (const auto& verb : kVerbs) {
    CLI::App* sub = app.add_subcommand(verb.name, verb.help);
    sub->add_option("--config", opt.config_path, "scenario file (INI)")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seeds, "seed list, e.g. 1,2,3");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--set", opt.overrides, "override key=value (repeatable)");
    sub->add_option("--policy", opt.policies, "policy name (repeatable)")->delimiter(',');
    sub->add_option("--kind", opt.kind, "experiment kind");
    sub->callback([&chosen, &verb] { chosen = &verb; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    return run(*chosen, opt);
  } catch (const offload::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const offload::DomainError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kNumerical;
  } catch (const offload::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kNumerical;
  } catch (const offload::ConcavityError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
