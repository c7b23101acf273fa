#pragma once

// TOML run/sweep files. Schema:
//
//   k = 4                                   # or k_values = [64, 256]
//   regime = { type = "rho", rho = 0.5 }    # or { type = "alpha", a = 2.0, b = 0.75 }
//   rho_values = [0.9, 0.95]                # heavy-traffic sweeps
//   policy = "lpf"                          # or policies = ["lpf", "serpt"]
//   engine = "ctmc"                         # or "event"
//   cap = 60                                # truncation cap for oracle solves
//   [plan]
//   measure_time = 1e4                      # or measure_scale = 1e4 (time = scale / (1 - rho))
//   warmup_time = 2e3                       # or warmup_fraction = 0.2 (default)
//   replications = 8
//   seed = 1
//   [[class]]
//   p = 0.5
//   dist = { type = "exp", rate = 1.0 }     # or { type = "hyperexp", branches = [{ prob = .5, rate = 2.0 }, ...] }
//   parallelism = { type = "const", m = 1 } # or { type = "log2" } / { type = "full" }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "malsched/simulation.hpp"
#include "malsched/workload.hpp"

namespace malsched {

struct PlanSpec {
  std::optional<double> measure_time;
  std::optional<double> measure_scale;
  std::optional<double> warmup_time;
  double warmup_fraction = 0.2;
  int replications = 8;
  std::uint64_t seed = 1;

  /// Concrete plan for a resolved config; measure_scale wins over the default
  /// but an explicit measure_time wins over both.
  SimPlan resolve(const SystemConfig& config) const;
};

enum class EngineKind { Ctmc, Event };

EngineKind parse_engine(std::string_view text);
std::string_view to_string(EngineKind engine);

struct ConfigFile {
  std::optional<int> k;
  std::vector<int> k_values;
  std::vector<double> rho_values;
  std::optional<ScalingRegime> regime;
  std::vector<ClassSpec> classes;
  std::vector<std::string> policies;
  EngineKind engine = EngineKind::Ctmc;
  std::optional<int> cap;
  PlanSpec plan;
};

/// Parses TOML text; errors are BadSpec with `source:line: key: message`.
ConfigFile parse_config_text(std::string_view text, std::string_view source_name = "<config>");

ConfigFile load_config_file(const std::filesystem::path& path);

}  // namespace malsched
