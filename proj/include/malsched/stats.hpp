#pragma once

#include <span>

namespace malsched {

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 95% Student-t half-width; 0 for a single sample
};

/// Mean and 95% confidence half-width over independent replication values.
MeanCi mean_ci95(std::span<const double> samples);

/// Two-sided 95% Student-t critical value with `dof` degrees of freedom.
double t_critical95(int dof);

}  // namespace malsched
