#pragma once

// Subcommands behind the malsched CLI. Each returns the process exit code and
// writes CSV to `out` only on success; diagnostics go to `err`.
//   0 ok, 2 config/infeasible, 3 engine failure, 4 truncation failure.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "malsched/config_file.hpp"
#include "malsched/policy.hpp"
#include "malsched/report.hpp"

namespace malsched {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitEngine = 3;
inline constexpr int kExitTruncation = 4;

int exit_code_for(ErrorKind kind);

struct CommandOptions {
  std::filesystem::path config;
  std::vector<std::string> policies;  // overrides the file's policy list
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<double> time;    // absolute measurement window
  std::optional<double> warmup;  // absolute warmup
  std::optional<EngineKind> engine;
  std::optional<int> cap;
  std::optional<double> tau;
  std::vector<double> rho_values;
  std::optional<int> threads;
  std::optional<std::filesystem::path> trajectory;  // ctmc: replication-0 state trajectory
  std::optional<std::filesystem::path> trace;       // event: replication-0 job trace
  std::optional<std::filesystem::path> dist;        // oracle: stationary distribution dump
};

/// Simulates one resolved point; tail columns use beta_i thresholds.
RunReport simulate_point(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan,
                         EngineKind engine, int threads);

int cmd_simulate(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_heavy(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_oracle(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_bounds(const CommandOptions& opts, std::ostream& out, std::ostream& err);

inline constexpr const char* kBoundsHeader =
    "k,rho,alpha,class,bound_service,bound_cmu,beta,thresh_t2_bound";

}  // namespace malsched
