#include "malsched/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

namespace malsched {

double t_critical95(int dof) {
  const boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, 0.025));
}

MeanCi mean_ci95(std::span<const double> samples) {
  MeanCi out;
  if (samples.empty()) return out;
  double sum = 0.0;
  for (const double x : samples) sum += x;
  const auto n = static_cast<double>(samples.size());
  out.mean = sum / n;
  if (samples.size() < 2) return out;
  double ss = 0.0;
  for (const double x : samples) ss += (x - out.mean) * (x - out.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  out.half_width = t_critical95(static_cast<int>(samples.size()) - 1) * sd / std::sqrt(n);
  return out;
}

}  // namespace malsched
