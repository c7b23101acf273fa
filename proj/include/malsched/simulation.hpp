#pragma once

// Types shared by the simulation engines: run plans, per-replication results,
// and the replication-statistics reduction.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "malsched/stats.hpp"
#include "malsched/workload.hpp"

namespace malsched {

struct SimPlan {
  double warmup_time = 2000.0;
  double measure_time = 10000.0;
  int replications = 8;
  std::uint64_t base_seed = 1;
  /// Per-class levels L_i for Pr(N_i >= L_i); empty means no tail statistics.
  std::vector<std::int64_t> tail_thresholds;

  /// Default warmup is 20% of the measurement window.
  static SimPlan with_measure(double measure_time, int replications = 8, std::uint64_t seed = 1) {
    SimPlan p;
    p.measure_time = measure_time;
    p.warmup_time = 0.2 * measure_time;
    p.replications = replications;
    p.base_seed = seed;
    return p;
  }

  void validate(int num_classes) const;
};

/// Output of one replication. Time averages cover [warmup, warmup + measure).
struct ReplicationStats {
  std::vector<double> mean_n;         // time-average class counts
  std::vector<double> tail_fraction;  // time fraction with N_i >= threshold_i
  std::vector<double> direct_t;       // event engine only: mean response time of departures
  std::vector<std::int64_t> departures;
  std::int64_t events = 0;
};

struct ClassEstimate {
  MeanCi mean_n;
  MeanCi mean_t;                   // Little: mean_n / lambda_i
  std::optional<MeanCi> tail;      // when a threshold was requested
  std::optional<MeanCi> direct_t;  // event engine only
};

struct Estimate {
  std::vector<ClassEstimate> classes;
  MeanCi mean_n;  // total count
  MeanCi mean_t;  // sum_i p_i mean_t_i
  std::optional<MeanCi> direct_t;
  int replications = 0;
  std::int64_t events = 0;
};

/// Reduces replications in index order; the result depends only on the values.
Estimate reduce_replications(const SystemConfig& config, const std::vector<ReplicationStats>& reps);

/// Worker threads for replication-parallel runs: MALSCHED_THREADS if set,
/// otherwise the OpenMP default.
int replication_threads();

/// Runs body(r) for r in [0, count) on up to `threads` OpenMP threads and
/// stores results by index.
std::vector<ReplicationStats> run_replications_parallel(
    int count, int threads, const std::function<ReplicationStats(int)>& body);

/// Serial reference used to check the parallel path.
std::vector<ReplicationStats> run_replications_serial(
    int count, const std::function<ReplicationStats(int)>& body);

}  // namespace malsched
