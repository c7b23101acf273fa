#pragma once

// Small named systems used by the test and acceptance suites: k <= 4 except
// the Full-parallelism hyperexponential case, at most three classes.

#include <string>
#include <vector>

#include "malsched/workload.hpp"

namespace malsched {

struct BundledConfig {
  std::string name;
  int k = 1;
  std::vector<ClassSpec> classes;
  ScalingRegime regime;
  int cap = 60;  // truncation cap that keeps boundary mass under 1e-8

  SystemConfig resolve() const { return resolve_config(k, classes, regime); }
};

std::vector<BundledConfig> bundled_configs();

/// Bundled configs whose classes are all exponential.
std::vector<BundledConfig> bundled_exponential_configs();

}  // namespace malsched
