#include "malsched/bundled.hpp"

namespace malsched {

namespace {

ClassSpec exp_class(double p, double mu, ParallelismRule rule) {
  return {SizeDist::exponential(mu), p, rule};
}

ClassSpec hyper_class(double p, std::vector<HyperBranch> branches, ParallelismRule rule) {
  return {SizeDist::hyperexp(std::move(branches)), p, rule};
}

}  // namespace

std::vector<BundledConfig> bundled_configs() {
  using R = ParallelismRule;
  std::vector<BundledConfig> out;
  out.push_back({"mm1_full_k3", 3, {exp_class(1.0, 1.0, R::full())}, FixedRho{0.5}, 80});
  out.push_back({"mm2_const1", 2, {exp_class(1.0, 1.0, R::constant(1))}, FixedRho{0.5}, 80});
  out.push_back({"two_class_k2", 2,
                 {exp_class(0.5, 1.0, R::constant(1)), exp_class(0.5, 2.0, R::full())},
                 FixedRho{0.6}, 120});
  out.push_back({"two_class_k4", 4,
                 {exp_class(0.5, 0.5, R::constant(1)), exp_class(0.5, 2.0, R::full())},
                 FixedRho{0.7}, 150});
  out.push_back({"three_class_k4", 4,
                 {exp_class(0.4, 1.0, R::constant(1)), exp_class(0.3, 0.5, R::constant(2)),
                  exp_class(0.3, 2.0, R::full())},
                 FixedRho{0.6}, 55});
  out.push_back({"three_class_k3", 3,
                 {exp_class(0.3, 2.0, R::constant(1)), exp_class(0.3, 1.0, R::constant(2)),
                  exp_class(0.4, 1.0, R::full())},
                 FixedRho{0.5}, 50});
  out.push_back({"hyper_k4", 4,
                 {hyper_class(0.5, {{0.5, 0.5}, {0.5, 2.0}}, R::constant(1)),
                  exp_class(0.5, 1.0, R::full())},
                 FixedRho{0.6}, 90});
  out.push_back({"hyper_full_k8", 8, {hyper_class(1.0, {{0.5, 0.5}, {0.5, 2.0}}, R::full())},
                 FixedRho{0.5}, 120});
  return out;
}

std::vector<BundledConfig> bundled_exponential_configs() {
  std::vector<BundledConfig> out;
  for (auto& b : bundled_configs()) {
    const bool all_exp = [&] {
      for (const auto& c : b.classes) {
        if (!c.size.is_exponential()) return false;
      }
      return true;
    }();
    if (all_exp) out.push_back(std::move(b));
  }
  return out;
}

}  // namespace malsched
