// malsched: command-line front end for the simulators and exact solvers.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "malsched/commands.hpp"

namespace {

using Command = int (*)(const malsched::CommandOptions&, std::ostream&, std::ostream&);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scheduling simulator and exact analysis for malleable parallel job classes"};
  app.require_subcommand(1);

  malsched::CommandOptions opts;
  std::string out_path;
  std::string engine;
  std::string policy_list;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "TOML config file")->required();
    sub->add_option("--policy", policy_list, "policy; several separated by ';'");
    sub->add_option("--seed", opts.seed, "base seed");
    sub->add_option("--out", out_path, "write CSV here instead of stdout");
    sub->add_option("--reps", opts.reps, "replications");
    sub->add_option("--time", opts.time, "measurement window");
    sub->add_option("--warmup", opts.warmup, "warmup time");
    sub->add_option("--engine", engine, "ctmc or event");
    sub->add_option("--threads", opts.threads, "replication threads (default MALSCHED_THREADS)");
  };

  struct Entry {
    CLI::App* sub;
    Command fn;
  };
  std::vector<Entry> entries;

  auto* simulate = app.add_subcommand("simulate", "simulate one point");
  add_common(simulate);
  simulate->add_option("--trajectory", opts.trajectory, "ctmc: dump replication-0 state trajectory");
  simulate->add_option("--trace", opts.trace, "event: dump replication-0 job trace");
  entries.push_back({simulate, malsched::cmd_simulate});

  auto* sweep = app.add_subcommand("sweep", "simulate every k in k_values");
  add_common(sweep);
  entries.push_back({sweep, malsched::cmd_sweep});

  auto* heavy = app.add_subcommand("heavy", "fixed k, sweep rho");
  add_common(heavy);
  heavy->add_option("--rho", opts.rho_values, "load values (overrides rho_values)");
  entries.push_back({heavy, malsched::cmd_heavy});

  auto* oracle = app.add_subcommand("oracle", "exact stationary values on a truncated chain");
  add_common(oracle);
  oracle->add_option("--cap", opts.cap, "per-class truncation cap");
  oracle->add_option("--dist", opts.dist, "dump the stationary distribution");
  entries.push_back({oracle, malsched::cmd_oracle});

  auto* bounds = app.add_subcommand("bounds", "analytic lower bounds and thresholds");
  add_common(bounds);
  bounds->add_option("--tau", opts.tau, "THRESH threshold for the class-2 bound");
  entries.push_back({bounds, malsched::cmd_bounds});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : malsched::kExitConfig;
  }

  if (!policy_list.empty()) {
    std::stringstream ss(policy_list);
    std::string item;
    while (std::getline(ss, item, ';')) {
      if (!item.empty()) opts.policies.push_back(item);
    }
  }
  if (!engine.empty()) {
    try {
      opts.engine = malsched::parse_engine(engine);
    } catch (const malsched::Error& e) {
      std::cerr << "malsched: " << e.what() << '\n';
      return malsched::kExitConfig;
    }
  }

  for (const auto& [sub, fn] : entries) {
    if (!sub->parsed()) continue;
    std::ostringstream buf;
    const int rc = fn(opts, buf, std::cerr);
    if (rc != malsched::kExitOk && buf.str().empty()) return rc;
    if (out_path.empty()) {
      std::cout << buf.str();
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) {
        std::cerr << "malsched: cannot write " << out_path << '\n';
        return malsched::kExitConfig;
      }
      f << buf.str();
    }
    return rc;
  }
  return malsched::kExitConfig;
}
