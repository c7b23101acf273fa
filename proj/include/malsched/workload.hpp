#pragma once

// Job classes, scaling regimes, and resolution of (k, regime, classes) into a
// concrete system instance.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "malsched/error.hpp"

namespace malsched {

struct Exponential {
  double rate = 1.0;
};

struct HyperBranch {
  double prob = 1.0;
  double rate = 1.0;
};

struct HyperExp {
  std::vector<HyperBranch> branches;
};

/// Job size distribution on a single speed-1 server.
class SizeDist {
 public:
  SizeDist() = default;
  SizeDist(Exponential e);  // NOLINT(google-explicit-constructor)
  SizeDist(HyperExp h);     // NOLINT(google-explicit-constructor)

  static SizeDist exponential(double rate) { return SizeDist(Exponential{rate}); }
  static SizeDist hyperexp(std::vector<HyperBranch> branches) {
    return SizeDist(HyperExp{std::move(branches)});
  }

  double mean() const;
  bool is_exponential() const { return std::holds_alternative<Exponential>(v_); }

  /// Branches as (prob, rate); an Exponential reports a single branch of prob 1.
  std::vector<HyperBranch> branches() const;

  const std::variant<Exponential, HyperExp>& variant() const { return v_; }

 private:
  void validate() const;
  std::variant<Exponential, HyperExp> v_{Exponential{}};
};

struct ParallelismRule {
  enum class Kind { Const, Log2, Full };
  Kind kind = Kind::Const;
  int m = 1;  // used by Const only

  static ParallelismRule constant(int m) { return {Kind::Const, m}; }
  static ParallelismRule log2() { return {Kind::Log2, 1}; }
  static ParallelismRule full() { return {Kind::Full, 1}; }
};

/// Servers a single job of this rule can use when the system has k servers.
int c_of(const ParallelismRule& rule, int k);

std::string to_string(const ParallelismRule& rule);

struct ClassSpec {
  SizeDist size;
  double p = 1.0;
  ParallelismRule parallelism;

  double mu() const { return 1.0 / size.mean(); }
};

/// alpha(k) = a * k^b spare servers.
struct PowerLawAlpha {
  double a = 1.0;
  double b = 0.5;
};

struct FixedRho {
  double rho = 0.5;
};

using ScalingRegime = std::variant<PowerLawAlpha, FixedRho>;

std::string to_string(const ScalingRegime& regime);

struct ResolvedClass {
  ClassSpec spec;
  int original_index = 0;  // position in the input list
  double lambda = 0.0;
  double mu = 0.0;
  int c = 1;
  double rho = 0.0;
};

/// Fully resolved instance. Classes are sorted by c ascending (stable).
struct SystemConfig {
  int k = 1;
  std::vector<ResolvedClass> classes;
  double lambda_total = 0.0;
  double rho = 0.0;
  double alpha = 0.0;

  int num_classes() const { return static_cast<int>(classes.size()); }
  bool all_exponential() const;
};

SystemConfig resolve_config(int k, const std::vector<ClassSpec>& classes,
                            const ScalingRegime& regime);

struct ServiceBound {
  std::vector<double> per_class;  // 1/(c_i mu_i)
  double aggregate = 0.0;         // sum p_i/(c_i mu_i)
};

/// Mean time in service when every job runs at its full parallelism.
ServiceBound lpf_service_lower_bound(const SystemConfig& config);

/// Four-class mix of the bundled fig1_* recipes: c = (1, 4, log2 k, k),
/// mu = (.2, .05, .3, .1), equal arrival shares.
std::vector<ClassSpec> four_class_mix();

}  // namespace malsched
