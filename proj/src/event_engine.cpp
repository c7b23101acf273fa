#include "malsched/event_engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "malsched/rng.hpp"

namespace malsched::event {

namespace {

struct ClassState {
  std::deque<Job> jobs;  // arrival order
  std::vector<double> cum_prob;
  std::vector<double> rates;
  double mu = 1.0;
  double lambda = 0.0;
  std::int64_t c = 1;
  bool exponential = true;

  double draw_phase(SplitMix64& rng) const {
    if (exponential) return mu;
    const double u = rng.uniform_open();
    for (std::size_t b = 0; b + 1 < cum_prob.size(); ++b) {
      if (u < cum_prob[b]) return rates[b];
    }
    return rates.back();
  }

  // Total completion hazard when the class holds `servers` servers.
  double hazard(std::int64_t servers) const {
    if (exponential) return mu * static_cast<double>(servers);
    double h = 0.0;
    std::int64_t left = servers;
    for (const auto& j : jobs) {
      if (left <= 0) break;
      const std::int64_t m = std::min(c, left);
      h += static_cast<double>(m) * j.phase_rate;
      left -= m;
    }
    return h;
  }

  // Index of the departing job for a uniform draw u in [0, hazard(servers)).
  std::size_t pick(std::int64_t servers, double u) const {
    std::int64_t left = servers;
    std::size_t last = 0;
    for (std::size_t idx = 0; idx < jobs.size() && left > 0; ++idx) {
      const std::int64_t m = std::min(c, left);
      const double h = static_cast<double>(m) * jobs[idx].phase_rate;
      if (u < h) return idx;
      u -= h;
      left -= m;
      last = idx;
    }
    return last;
  }
};

void check_state(const std::vector<ClassState>& cls, const std::vector<std::int64_t>& alloc,
                 std::int64_t k, std::int64_t arrived, std::int64_t departed) {
  std::int64_t in_system = 0;
  std::int64_t used = 0;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    const auto& cs = cls[i];
    in_system += static_cast<std::int64_t>(cs.jobs.size());
    std::int64_t left = alloc[i];
    std::int64_t given = 0;
    for (const auto& j : cs.jobs) {
      if (j.servers_now > cs.c) throw Error(ErrorKind::BadSpec, "job exceeds its parallelism cap");
      given += j.servers_now;
      left -= j.servers_now;
    }
    if (left != 0) throw Error(ErrorKind::BadSpec, "class allocation not fully distributed");
    used += given;
  }
  if (used > k) throw Error(ErrorKind::BadSpec, "more than k servers in use");
  if (arrived != departed + in_system) throw Error(ErrorKind::BadSpec, "job conservation violated");
}

void assign_servers(std::vector<ClassState>& cls, const std::vector<std::int64_t>& alloc) {
  for (std::size_t i = 0; i < cls.size(); ++i) {
    std::int64_t left = alloc[i];
    for (auto& j : cls[i].jobs) {
      j.servers_now = std::min(cls[i].c, left);
      left -= j.servers_now;
    }
  }
}

}  // namespace

RunResult run(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan,
              std::uint64_t seed, const RunOptions& options) {
  const int nc = config.num_classes();
  plan.validate(nc);
  const auto ncs = static_cast<std::size_t>(nc);
  const Allocator allocator(policy, config);

  std::vector<ClassState> cls(ncs);
  double lambda_total = 0.0;
  for (std::size_t i = 0; i < ncs; ++i) {
    const auto& rc = config.classes[i];
    auto& cs = cls[i];
    cs.mu = rc.mu;
    cs.lambda = rc.lambda;
    cs.c = rc.c;
    cs.exponential = rc.spec.size.is_exponential();
    double cum = 0.0;
    for (const auto& b : rc.spec.size.branches()) {
      cum += b.prob;
      cs.cum_prob.push_back(cum);
      cs.rates.push_back(b.rate);
    }
    lambda_total += rc.lambda;
  }

  const bool tails = !plan.tail_thresholds.empty();
  const double t_start = plan.warmup_time;
  const double t_end = plan.warmup_time + plan.measure_time;

  RunResult res;
  auto& st = res.stats;
  st.mean_n.assign(ncs, 0.0);
  st.direct_t.assign(ncs, 0.0);
  st.departures.assign(ncs, 0);
  if (tails) st.tail_fraction.assign(ncs, 0.0);

  std::vector<std::int64_t> n(ncs, 0), alloc(ncs, 0);
  std::vector<double> hazard(ncs, 0.0);
  std::int64_t total = 0;
  std::int64_t next_id = 0;

  const auto refresh = [&]() {
    allocator(n, total, alloc);
    for (std::size_t i = 0; i < ncs; ++i) hazard[i] = cls[i].hazard(alloc[i]);
    if (options.check_invariants) {
      assign_servers(cls, alloc);
      check_state(cls, alloc, config.k, res.arrived, res.departed);
    }
  };

  SplitMix64 rng(seed);
  double t = 0.0;
  std::int64_t measured_events = 0;
  refresh();
  while (true) {
    double rate = lambda_total;
    for (const double h : hazard) rate += h;
    const double t_next = t + rng.exponential(rate);

    const double lo = std::max(t, t_start);
    const double hi = std::min(t_next, t_end);
    if (hi > lo) {
      const double len = hi - lo;
      for (std::size_t i = 0; i < ncs; ++i) {
        st.mean_n[i] += static_cast<double>(n[i]) * len;
        if (tails && n[i] >= plan.tail_thresholds[i]) st.tail_fraction[i] += len;
      }
    }
    if (t_next >= t_end) break;
    t = t_next;

    double u = rng.uniform_open() * rate;
    std::size_t pick = 0;
    bool arrival = false;
    for (; pick < ncs; ++pick) {
      if (u < cls[pick].lambda) {
        arrival = true;
        break;
      }
      u -= cls[pick].lambda;
    }
    if (arrival) {
      auto& cs = cls[pick];
      cs.jobs.push_back(Job{next_id++, static_cast<int>(pick), t, cs.draw_phase(rng), 0});
      ++n[pick];
      ++total;
      ++res.arrived;
    } else {
      for (pick = 0; pick < ncs; ++pick) {
        if (u < hazard[pick]) break;
        u -= hazard[pick];
      }
      if (pick == ncs) {
        pick = ncs - 1;
        while (hazard[pick] <= 0.0) --pick;
        u = 0.0;
      }
      auto& cs = cls[pick];
      const std::size_t idx = cs.pick(alloc[pick], u);
      const Job job = cs.jobs[idx];
      cs.jobs.erase(cs.jobs.begin() + static_cast<std::ptrdiff_t>(idx));
      --n[pick];
      --total;
      ++res.departed;
      if (options.trace) {
        *options.trace << job.id << ',' << job.cls + 1 << ',' << job.arrival_time << ',' << t << ','
                       << job.phase_rate << '\n';
      }
      if (t >= t_start) {
        st.direct_t[pick] += t - job.arrival_time;
        ++st.departures[pick];
        if (options.records) options.records->push_back({job.cls, job.arrival_time, t});
      }
    }
    refresh();
    ++st.events;
    if (t >= t_start) ++measured_events;
  }

  if (measured_events == 0) {
    throw Error(ErrorKind::NumericalHorizonTooSmall, "no events after warmup");
  }
  for (auto& v : st.mean_n) v /= plan.measure_time;
  for (auto& v : st.tail_fraction) v /= plan.measure_time;
  for (std::size_t i = 0; i < ncs; ++i) {
    st.direct_t[i] = st.departures[i] > 0 ? st.direct_t[i] / static_cast<double>(st.departures[i])
                                          : std::numeric_limits<double>::quiet_NaN();
  }
  res.in_system = total;
  return res;
}

Estimate estimate(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan) {
  return estimate(config, policy, plan, replication_threads());
}

Estimate estimate(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan,
                  int threads) {
  plan.validate(config.num_classes());
  const auto reps = run_replications_parallel(plan.replications, threads, [&](int r) {
    return run(config, policy, plan, plan.base_seed + static_cast<std::uint64_t>(r)).stats;
  });
  return reduce_replications(config, reps);
}

Estimate estimate_serial(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan) {
  plan.validate(config.num_classes());
  const auto reps = run_replications_serial(plan.replications, [&](int r) {
    return run(config, policy, plan, plan.base_seed + static_cast<std::uint64_t>(r)).stats;
  });
  return reduce_replications(config, reps);
}

std::int64_t Histogram::total() const {
  std::int64_t s = 0;
  for (const auto c : counts) s += c;
  return s;
}

Histogram Histogram::merged(const Histogram& other) const {
  if (other.bucket_width != bucket_width) {
    throw Error(ErrorKind::BadSpec, "cannot merge histograms with different bucket widths");
  }
  Histogram out{bucket_width, counts};
  if (other.counts.size() > out.counts.size()) out.counts.resize(other.counts.size(), 0);
  for (std::size_t b = 0; b < other.counts.size(); ++b) out.counts[b] += other.counts[b];
  return out;
}

Histogram response_time_histogram(std::span<const JobRecord> records, double bucket_width) {
  if (!(bucket_width > 0.0)) throw Error(ErrorKind::BadSpec, "bucket_width must be > 0");
  Histogram h{bucket_width, {}};
  for (const auto& r : records) {
    const auto b = static_cast<std::size_t>(std::floor(r.response_time() / bucket_width));
    if (b >= h.counts.size()) h.counts.resize(b + 1, 0);
    ++h.counts[b];
  }
  return h;
}

}  // namespace malsched::event
