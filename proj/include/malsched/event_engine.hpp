#pragma once

// Per-job discrete-event simulator. Tracks each job's arrival time and hidden
// exponential phase, so it handles hyperexponential classes and measures
// response times directly.

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "malsched/policy.hpp"
#include "malsched/simulation.hpp"

namespace malsched::event {

struct Job {
  std::int64_t id = 0;
  int cls = 0;
  double arrival_time = 0.0;
  double phase_rate = 1.0;  // drawn at arrival, hidden from the scheduler
  std::int64_t servers_now = 0;
};

struct JobRecord {
  int cls = 0;
  double arrival_time = 0.0;
  double departure_time = 0.0;

  double response_time() const { return departure_time - arrival_time; }
};

struct RunOptions {
  /// Receives `id,class,arrival,departure,phase_rate` for every departure.
  std::ostream* trace = nullptr;
  /// Receives records of post-warmup departures.
  std::vector<JobRecord>* records = nullptr;
  /// Re-check per-job server caps and conservation after every event.
  bool check_invariants = false;
};

struct RunResult {
  ReplicationStats stats;
  std::int64_t arrived = 0;
  std::int64_t departed = 0;
  std::int64_t in_system = 0;
};

/// One replication. Class allocation comes from the policy; inside a class
/// servers go to jobs in arrival order, up to c_i each.
RunResult run(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan,
              std::uint64_t seed, const RunOptions& options = {});

Estimate estimate(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan);

Estimate estimate(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan,
                  int threads);

Estimate estimate_serial(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan);

struct Histogram {
  double bucket_width = 1.0;
  std::vector<std::int64_t> counts;  // counts[b] covers [b*w, (b+1)*w)

  std::int64_t total() const;
  /// Bucket-wise sum; the shorter histogram is zero-extended.
  Histogram merged(const Histogram& other) const;
};

Histogram response_time_histogram(std::span<const JobRecord> records, double bucket_width);

}  // namespace malsched::event
