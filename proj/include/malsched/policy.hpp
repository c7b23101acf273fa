#pragma once

// Scheduling policies: priority orders, greedy class-level server allocation,
// and the single-fast-server comparison systems.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "malsched/workload.hpp"

namespace malsched {

/// Jobs per class, indexed like SystemConfig::classes.
using StateCounts = std::vector<std::int64_t>;
/// Servers per class.
using Allocation = std::vector<std::int64_t>;

struct TauRule {
  enum class Kind { KLogK, Multiple, Fixed };
  Kind kind = Kind::KLogK;
  double value = 0.0;  // m for Multiple, t for Fixed

  static TauRule k_log_k() { return {Kind::KLogK, 0.0}; }
  static TauRule multiple(double m) { return {Kind::Multiple, m}; }
  static TauRule fixed(double t) { return {Kind::Fixed, t}; }

  /// Threshold on the total job count; always >= 1.
  std::int64_t eval(int k) const;
};

struct Lpf {};
struct Serpt {};
struct Thresh {
  TauRule tau;
};
struct FixedPriority {
  std::vector<int> order;  // 0-based class indices, highest priority first
};
struct SingleFast {
  enum class Order { CMu, Lpf1, Explicit };
  Order order = Order::CMu;
  std::vector<int> explicit_order;
};

using PolicySpec = std::variant<Lpf, Serpt, Thresh, FixedPriority, SingleFast>;

bool is_single_fast(const PolicySpec& policy);

/// Parses `lpf | serpt | thresh[:tau=klogk|<m>k|<t>] | prio:<1-based order> |
/// cmu | lpf1 | sf:<1-based order>`.
PolicySpec parse_policy(const std::string& text);

/// Inverse of parse_policy (canonical spelling).
std::string policy_name(const PolicySpec& policy);

/// Static priority order, highest first. Throws NotAPriorityPolicy for THRESH.
std::vector<int> priority_order(const PolicySpec& policy, const SystemConfig& config);

/// Greedy fill along `order`: a_i = min(n_i c_i, remaining budget).
void greedy_fill(std::span<const int> order, std::span<const std::int64_t> n,
                 std::span<const int> c, std::int64_t k, std::span<std::int64_t> out);

Allocation allocate(const PolicySpec& policy, const StateCounts& state, const SystemConfig& config);

struct FastServe {
  int cls = -1;  // -1 when idle
  double rate = 0.0;

  bool idle() const { return cls < 0; }
};

FastServe single_fast_rate(const SingleFast& policy, const StateCounts& state,
                           const SystemConfig& config);

/// Precomputed allocation rule for hot simulation loops.
class Allocator {
 public:
  Allocator(const PolicySpec& policy, const SystemConfig& config);

  /// Writes the allocation for state n into out; total is sum of n.
  void operator()(std::span<const std::int64_t> n, std::int64_t total,
                  std::span<std::int64_t> out) const {
    const auto& order = (thresh_ && total > tau_) ? alt_order_ : order_;
    greedy_fill(order, n, c_, k_, out);
  }

 private:
  std::vector<int> order_;
  std::vector<int> alt_order_;
  std::vector<int> c_;
  std::int64_t k_ = 1;
  bool thresh_ = false;
  std::int64_t tau_ = 0;
};

}  // namespace malsched
