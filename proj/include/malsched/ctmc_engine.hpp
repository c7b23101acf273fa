#pragma once

// Gillespie simulation of the class-count Markov chain induced by a policy.
// Exponential classes only; hyperexponential workloads go to the event engine.

#include <cstdint>
#include <ostream>

#include "malsched/policy.hpp"
#include "malsched/simulation.hpp"

namespace malsched::ctmc {

/// One replication from the empty state. Statistics are time-weighted over
/// [plan.warmup_time, plan.warmup_time + plan.measure_time). When `trajectory`
/// is non-null every post-warmup state is written as `time,n_1..n_l,a_1..a_l`.
ReplicationStats simulate_once(const SystemConfig& config, const PolicySpec& policy,
                               const SimPlan& plan, std::uint64_t seed,
                               std::ostream* trajectory = nullptr);

/// Replications with seeds base_seed + r, run on replication_threads() threads.
Estimate estimate(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan);

Estimate estimate(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan,
                  int threads);

/// Serial reference for estimate(); produces bitwise-identical results.
Estimate estimate_serial(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan);

}  // namespace malsched::ctmc
