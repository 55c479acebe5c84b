#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "robust_etc/commands.hpp"
#include "robust_etc/config.hpp"
#include "robust_etc/error.hpp"

namespace {

using namespace robust_etc;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Options& opts, bool needs_config) {
  auto* cfg = cmd->add_option("--config", opts.config, "experiment config (JSON)");
  if (needs_config) cfg->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out, "output directory (default: output.dir from the config)");
  cmd->add_option("--seed", opts.seed, "override simulation.seed");
}

int dispatch(const std::string& name, const Options& opts) {
  if (name == "scaffold") {
    const CommandResult r = run_scaffold(opts.out.empty() ? std::string(".") : opts.out);
    std::cout << r.summary;
    return r.exit_code;
  }

  ExperimentConfig config = load_config(opts.config);
  if (opts.seed) config.simulation.seed = *opts.seed;
  const std::filesystem::path out = opts.out.empty() ? config.output.dir : opts.out;

  CommandResult r;
  if (name == "synth") {
    r = run_synth(config, out);
  } else if (name == "simulate") {
    r = run_simulate(config, out);
  } else if (name == "compare") {
    r = run_compare(config, out);
  } else {
    r = run_verify(config, out);
  }
  std::cout << r.summary;
  for (const auto& path : r.written) std::cout << "wrote " << path.string() << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust event-triggered controller synthesis, simulation and verification"};
  app.require_subcommand(1);

  Options opts;
  const std::pair<const char*, const char*> commands[] = {
      {"synth", "solve the Riccati equation, compute gains, Z, Q1, mu1 and the feasibility report"},
      {"simulate", "simulate the closed loop and write a CSV trace"},
      {"compare", "run periodic and event-triggered policies on the same parameter path"},
      {"verify", "audit the lemmas, the identity and the dissipation inequality"},
      {"scaffold", "write a template config"},
  };
  for (const auto& [name, help] : commands) {
    add_common(app.add_subcommand(name, help), opts, std::string(name) != "scaffold");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return dispatch(name, opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ConditionViolation& e) {
    std::cerr << "numerical failure: condition (" << e.condition() << ") violated: " << e.what()
              << '\n';
    return kExitNumericalFailure;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
}
