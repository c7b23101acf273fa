#include "malsched/simulation.hpp"

#include <cstdlib>
#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "malsched/error.hpp"

namespace malsched {

void SimPlan::validate(int num_classes) const {
  if (!(warmup_time >= 0.0)) throw Error(ErrorKind::BadSpec, "warmup_time must be >= 0");
  if (!(measure_time > 0.0)) throw Error(ErrorKind::BadSpec, "measure_time must be > 0");
  if (replications < 1) throw Error(ErrorKind::BadSpec, "replications must be >= 1");
  if (!tail_thresholds.empty() && static_cast<int>(tail_thresholds.size()) != num_classes) {
    throw Error(ErrorKind::DimensionMismatch, "tail_thresholds needs one level per class");
  }
}

Estimate reduce_replications(const SystemConfig& config, const std::vector<ReplicationStats>& reps) {
  const auto nc = config.classes.size();
  Estimate est;
  est.replications = static_cast<int>(reps.size());
  est.classes.resize(nc);
  std::vector<double> buf(reps.size());
  const bool has_tail = !reps.empty() && !reps.front().tail_fraction.empty();
  const bool has_direct = !reps.empty() && !reps.front().direct_t.empty();

  for (std::size_t i = 0; i < nc; ++i) {
    const double lambda = config.classes[i].lambda;
    auto& ce = est.classes[i];
    for (std::size_t r = 0; r < reps.size(); ++r) buf[r] = reps[r].mean_n[i];
    ce.mean_n = mean_ci95(buf);
    ce.mean_t = {ce.mean_n.mean / lambda, ce.mean_n.half_width / lambda};
    if (has_tail) {
      for (std::size_t r = 0; r < reps.size(); ++r) buf[r] = reps[r].tail_fraction[i];
      ce.tail = mean_ci95(buf);
    }
    if (has_direct) {
      for (std::size_t r = 0; r < reps.size(); ++r) buf[r] = reps[r].direct_t[i];
      ce.direct_t = mean_ci95(buf);
    }
  }

  for (std::size_t r = 0; r < reps.size(); ++r) {
    double total = 0.0;
    for (std::size_t i = 0; i < nc; ++i) total += reps[r].mean_n[i];
    buf[r] = total;
  }
  est.mean_n = mean_ci95(buf);
  for (std::size_t r = 0; r < reps.size(); ++r) buf[r] /= config.lambda_total;
  est.mean_t = mean_ci95(buf);

  if (has_direct) {
    for (std::size_t r = 0; r < reps.size(); ++r) {
      double t = 0.0;
      for (std::size_t i = 0; i < nc; ++i) t += config.classes[i].spec.p * reps[r].direct_t[i];
      buf[r] = t;
    }
    est.direct_t = mean_ci95(buf);
  }
  for (const auto& r : reps) est.events += r.events;
  return est;
}

int replication_threads() {
  if (const char* env = std::getenv("MALSCHED_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<ReplicationStats> run_replications_parallel(
    int count, int threads, const std::function<ReplicationStats(int)>& body) {
  std::vector<ReplicationStats> out(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int r = 0; r < count; ++r) {
    try {
      out[static_cast<std::size_t>(r)] = body(r);
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<ReplicationStats> run_replications_serial(
    int count, const std::function<ReplicationStats(int)>& body) {
  std::vector<ReplicationStats> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int r = 0; r < count; ++r) out.push_back(body(r));
  return out;
}

}  // namespace malsched
