#pragma once

// Exact oracles: stationary solution of the truncated class-count chain,
// preemptive-priority formulas for the single speed-k server, and closed-form
// bounds.

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "malsched/policy.hpp"
#include "malsched/workload.hpp"

namespace malsched::exact {

struct TruncationSpec {
  int cap = 60;                     // per-class maximum count
  double boundary_tolerance = 1e-8;  // allowed stationary mass on capped states

  void validate() const;
};

struct StationaryResult {
  std::vector<double> mean_n;
  std::vector<double> mean_t;
  double total_mean_n = 0.0;
  double mean_t_aggregate = 0.0;  // sum_i p_i mean_t_i
  double boundary_mass = 0.0;
  double residual = 0.0;  // max |(pi Q)_j|
  std::int64_t num_states = 0;
  bool used_iterative = false;
  /// Stationary mass aggregated by class counts; entries above 1e-12, sorted.
  std::vector<std::pair<std::vector<int>, double>> distribution;
};

/// Largest state count solved with sparse LU; larger chains use damped Jacobi.
inline constexpr std::int64_t kDirectSolveLimit = 50'000;
inline constexpr std::int64_t kMaxStates = 10'000'000;
inline constexpr double kResidualTarget = 1e-10;

/// Stationary class counts of the chain truncated at trunc.cap jobs per class
/// (arrivals blocked at the cap). Exponential classes only. Works for k-server
/// policies and single-fast-server systems.
StationaryResult stationary_truncated(const SystemConfig& config, const PolicySpec& policy,
                                      const TruncationSpec& trunc);

/// Same solver on the phase-expanded chain: for each class the hidden phases of
/// the first ceil(k/c_i) jobs in arrival order are part of the state. Exact for
/// the event engine's in-class FCFS server split with hyperexponential classes.
StationaryResult stationary_phase_expanded(const SystemConfig& config, const PolicySpec& policy,
                                           const TruncationSpec& trunc);

/// Writes `n_1..n_l,prob` rows for states above 1e-12 mass.
void write_distribution(const StationaryResult& result, int num_classes, std::ostream& os);

/// Sparse generator in compressed form: transitions out of each state.
struct Generator {
  std::int64_t num_states = 0;
  std::vector<std::int64_t> row_start;  // size num_states + 1
  std::vector<std::int64_t> target;
  std::vector<double> rate;
};

struct SolveResult {
  std::vector<double> pi;
  double residual = 0.0;
  bool iterative = false;
};

/// Solves pi Q = 0, sum pi = 1. Uses sparse LU up to kDirectSolveLimit states,
/// otherwise damped Jacobi (OpenMP) down to kResidualTarget.
SolveResult solve_stationary(const Generator& gen);

SolveResult solve_stationary_direct(const Generator& gen);
SolveResult solve_stationary_jacobi(const Generator& gen, int threads);
/// Serial reference for the Jacobi kernel.
SolveResult solve_stationary_jacobi_serial(const Generator& gen);

/// max_j |(pi Q)_j|.
double generator_residual(const Generator& gen, std::span<const double> pi);

struct PriorityQueueResult {
  std::vector<double> mean_t;  // indexed by class
  std::vector<double> mean_n;
  double mean_t_aggregate = 0.0;
  std::vector<double> sigma;  // cumulative load along the order
};

/// Preemptive-resume priority M/M/1 at speed k serving classes in `order`.
PriorityQueueResult priority_mm1_speed_k(const SystemConfig& config, std::span<const int> order);

/// The c-mu single-server lower-bound system (descending mu).
PriorityQueueResult cmu_system(const SystemConfig& config);

/// Upper bound on the mean class-2 response time under THRESH, two classes.
double thresh_t2_bound(const SystemConfig& config, double tau);
double thresh_t2_bound(int k, double mu2, double rho2, double tau);

/// Class-i count needed to occupy rho_i k + alpha/l servers.
std::int64_t beta_threshold(const SystemConfig& config, int cls);
std::int64_t beta_threshold(int k, double rho_i, double alpha, int num_classes, int c_i);

}  // namespace malsched::exact
