#include "malsched/workload.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace malsched {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::InfeasibleLoad: return "InfeasibleLoad";
    case ErrorKind::NotAPriorityPolicy: return "NotAPriorityPolicy";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::HyperExpUnsupported: return "HyperExpUnsupported";
    case ErrorKind::NumericalHorizonTooSmall: return "NumericalHorizonTooSmall";
    case ErrorKind::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorKind::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorKind::SolverDidNotConverge: return "SolverDidNotConverge";
    case ErrorKind::UnstableSystem: return "UnstableSystem";
    case ErrorKind::WrongClassCount: return "WrongClassCount";
  }
  return "Unknown";
}

namespace {

constexpr double kProbTolerance = 1e-12;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

SizeDist::SizeDist(Exponential e) : v_(e) { validate(); }

SizeDist::SizeDist(HyperExp h) : v_(std::move(h)) { validate(); }

void SizeDist::validate() const {
  if (const auto* e = std::get_if<Exponential>(&v_)) {
    if (!positive_finite(e->rate)) {
      throw Error(ErrorKind::BadSpec, "exponential rate must be > 0");
    }
    return;
  }
  const auto& h = std::get<HyperExp>(v_);
  if (h.branches.empty()) throw Error(ErrorKind::BadSpec, "hyperexponential needs at least one branch");
  double total = 0.0;
  for (const auto& b : h.branches) {
    if (!positive_finite(b.prob)) throw Error(ErrorKind::BadSpec, "branch probability must be > 0");
    if (!positive_finite(b.rate)) throw Error(ErrorKind::BadSpec, "branch rate must be > 0");
    total += b.prob;
  }
  if (std::abs(total - 1.0) > kProbTolerance) {
    throw Error(ErrorKind::BadSpec, "branch probabilities sum to " + std::to_string(total));
  }
}

double SizeDist::mean() const {
  if (const auto* e = std::get_if<Exponential>(&v_)) return 1.0 / e->rate;
  double m = 0.0;
  for (const auto& b : std::get<HyperExp>(v_).branches) m += b.prob / b.rate;
  return m;
}

std::vector<HyperBranch> SizeDist::branches() const {
  if (const auto* e = std::get_if<Exponential>(&v_)) return {HyperBranch{1.0, e->rate}};
  return std::get<HyperExp>(v_).branches;
}

int c_of(const ParallelismRule& rule, int k) {
  switch (rule.kind) {
    case ParallelismRule::Kind::Const: return std::min(rule.m, k);
    case ParallelismRule::Kind::Log2: return std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(k))) - 1);
    case ParallelismRule::Kind::Full: return k;
  }
  return 1;
}

std::string to_string(const ParallelismRule& rule) {
  switch (rule.kind) {
    case ParallelismRule::Kind::Const: return "const(" + std::to_string(rule.m) + ")";
    case ParallelismRule::Kind::Log2: return "log2";
    case ParallelismRule::Kind::Full: return "full";
  }
  return "?";
}

std::string to_string(const ScalingRegime& regime) {
  std::ostringstream os;
  if (const auto* p = std::get_if<PowerLawAlpha>(&regime)) {
    os << "alpha=" << p->a << "*k^" << p->b;
  } else {
    os << "rho=" << std::get<FixedRho>(regime).rho;
  }
  return os.str();
}

bool SystemConfig::all_exponential() const {
  return std::all_of(classes.begin(), classes.end(),
                     [](const ResolvedClass& c) { return c.spec.size.is_exponential(); });
}

SystemConfig resolve_config(int k, const std::vector<ClassSpec>& classes,
                            const ScalingRegime& regime) {
  if (k < 1) throw Error(ErrorKind::BadSpec, "k must be >= 1");
  if (classes.empty()) throw Error(ErrorKind::BadSpec, "at least one class is required");

  double p_total = 0.0;
  for (const auto& c : classes) {
    if (!(c.p > 0.0 && c.p <= 1.0)) throw Error(ErrorKind::BadSpec, "class share p must lie in (0,1]");
    if (c.parallelism.kind == ParallelismRule::Kind::Const && c.parallelism.m < 1) {
      throw Error(ErrorKind::BadSpec, "const parallelism must be >= 1");
    }
    p_total += c.p;
  }
  if (std::abs(p_total - 1.0) > kProbTolerance) {
    throw Error(ErrorKind::BadSpec, "class shares sum to " + std::to_string(p_total));
  }

  const double kd = static_cast<double>(k);
  double rho = 0.0;
  double alpha = 0.0;
  if (const auto* pl = std::get_if<PowerLawAlpha>(&regime)) {
    alpha = pl->a * std::pow(kd, pl->b);
    if (!(alpha > 0.0) || alpha >= kd * (1.0 - 1e-12)) {
      throw Error(ErrorKind::InfeasibleLoad,
                  "alpha=" + std::to_string(alpha) + " not in (0, k=" + std::to_string(k) + ")");
    }
    rho = 1.0 - alpha / kd;
  } else {
    rho = std::get<FixedRho>(regime).rho;
    if (!(rho > 0.0 && rho < 1.0)) {
      throw Error(ErrorKind::InfeasibleLoad, "rho=" + std::to_string(rho) + " not in (0,1)");
    }
    alpha = kd * (1.0 - rho);
  }

  double work_per_arrival = 0.0;  // sum p_i / mu_i
  for (const auto& c : classes) work_per_arrival += c.p * c.size.mean();

  SystemConfig cfg;
  cfg.k = k;
  cfg.rho = rho;
  cfg.alpha = alpha;
  cfg.lambda_total = rho * kd / work_per_arrival;
  cfg.classes.reserve(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    ResolvedClass rc;
    rc.spec = classes[i];
    rc.original_index = static_cast<int>(i);
    rc.mu = classes[i].mu();
    rc.c = c_of(classes[i].parallelism, k);
    rc.lambda = classes[i].p * cfg.lambda_total;
    rc.rho = rc.lambda / (kd * rc.mu);
    cfg.classes.push_back(std::move(rc));
  }
  std::stable_sort(cfg.classes.begin(), cfg.classes.end(),
                   [](const ResolvedClass& a, const ResolvedClass& b) { return a.c < b.c; });
  return cfg;
}

ServiceBound lpf_service_lower_bound(const SystemConfig& config) {
  ServiceBound out;
  out.per_class.reserve(config.classes.size());
  for (const auto& c : config.classes) {
    const double t = 1.0 / (static_cast<double>(c.c) * c.mu);
    out.per_class.push_back(t);
    out.aggregate += c.spec.p * t;
  }
  return out;
}

std::vector<ClassSpec> four_class_mix() {
  return {
      {SizeDist::exponential(0.2), 0.25, ParallelismRule::constant(1)},
      {SizeDist::exponential(0.05), 0.25, ParallelismRule::constant(4)},
      {SizeDist::exponential(0.3), 0.25, ParallelismRule::log2()},
      {SizeDist::exponential(0.1), 0.25, ParallelismRule::full()},
  };
}

}  // namespace malsched
