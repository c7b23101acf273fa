#include "malsched/ctmc_engine.hpp"

#include <algorithm>
#include <optional>

#include "malsched/rng.hpp"

namespace malsched::ctmc {

namespace {

void write_row(std::ostream& os, double t, const std::vector<std::int64_t>& n,
               const std::vector<double>& dep, const std::vector<double>& mu) {
  os << t;
  for (const auto v : n) os << ',' << v;
  // servers are reported as departure rate / mu, exact for integer allocations
  for (std::size_t i = 0; i < dep.size(); ++i) os << ',' << static_cast<std::int64_t>(dep[i] / mu[i] + 0.5);
  os << '\n';
}

}  // namespace

ReplicationStats simulate_once(const SystemConfig& config, const PolicySpec& policy,
                               const SimPlan& plan, std::uint64_t seed, std::ostream* trajectory) {
  if (!config.all_exponential()) {
    throw Error(ErrorKind::HyperExpUnsupported, "class-count chain needs exponential classes; use the event engine");
  }
  const int nc = config.num_classes();
  plan.validate(nc);
  const auto ncs = static_cast<std::size_t>(nc);

  std::vector<double> lambda(ncs), mu(ncs);
  double lambda_total = 0.0;
  for (std::size_t i = 0; i < ncs; ++i) {
    lambda[i] = config.classes[i].lambda;
    mu[i] = config.classes[i].mu;
    lambda_total += lambda[i];
  }

  // Servers for k-server policies; single-fast systems serve one class at k*mu.
  std::optional<Allocator> allocator;
  std::vector<int> fast_order;
  if (const auto* sf = std::get_if<SingleFast>(&policy)) {
    fast_order = priority_order(*sf, config);
  } else {
    allocator.emplace(policy, config);
  }
  const double kd = static_cast<double>(config.k);

  std::vector<std::int64_t> n(ncs, 0), a(ncs, 0);
  std::vector<double> dep(ncs, 0.0);
  std::int64_t total = 0;

  const auto refresh = [&]() {
    if (allocator) {
      (*allocator)(n, total, a);
      for (std::size_t i = 0; i < ncs; ++i) dep[i] = mu[i] * static_cast<double>(a[i]);
    } else {
      std::fill(dep.begin(), dep.end(), 0.0);
      for (const int j : fast_order) {
        const auto js = static_cast<std::size_t>(j);
        if (n[js] > 0) {
          dep[js] = kd * mu[js];
          break;
        }
      }
    }
  };

  const bool tails = !plan.tail_thresholds.empty();
  const double t_start = plan.warmup_time;
  const double t_end = plan.warmup_time + plan.measure_time;

  ReplicationStats out;
  out.mean_n.assign(ncs, 0.0);
  if (tails) out.tail_fraction.assign(ncs, 0.0);

  SplitMix64 rng(seed);
  double t = 0.0;
  std::int64_t measured_events = 0;
  refresh();
  while (true) {
    double rate = lambda_total;
    for (const double d : dep) rate += d;
    const double t_next = t + rng.exponential(rate);

    const double lo = std::max(t, t_start);
    const double hi = std::min(t_next, t_end);
    if (hi > lo) {
      const double len = hi - lo;
      for (std::size_t i = 0; i < ncs; ++i) {
        out.mean_n[i] += static_cast<double>(n[i]) * len;
        if (tails && n[i] >= plan.tail_thresholds[i]) out.tail_fraction[i] += len;
      }
    }
    if (t_next >= t_end) break;
    t = t_next;

    double u = rng.uniform_open() * rate;
    std::size_t pick = 0;
    bool arrival = false;
    for (; pick < ncs; ++pick) {
      if (u < lambda[pick]) {
        arrival = true;
        break;
      }
      u -= lambda[pick];
    }
    if (!arrival) {
      for (pick = 0; pick < ncs; ++pick) {
        if (u < dep[pick]) break;
        u -= dep[pick];
      }
      // round-off can push u past the last positive rate
      if (pick == ncs) {
        pick = ncs - 1;
        while (dep[pick] <= 0.0) --pick;
      }
    }
    if (arrival) {
      ++n[pick];
      ++total;
    } else {
      --n[pick];
      --total;
    }
    refresh();
    ++out.events;
    if (t >= t_start) {
      ++measured_events;
      if (trajectory) write_row(*trajectory, t, n, dep, mu);
    }
  }

  if (measured_events == 0) {
    throw Error(ErrorKind::NumericalHorizonTooSmall, "no events after warmup");
  }
  for (auto& v : out.mean_n) v /= plan.measure_time;
  for (auto& v : out.tail_fraction) v /= plan.measure_time;
  return out;
}

Estimate estimate(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan) {
  return estimate(config, policy, plan, replication_threads());
}

Estimate estimate(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan,
                  int threads) {
  plan.validate(config.num_classes());
  const auto reps = run_replications_parallel(plan.replications, threads, [&](int r) {
    return simulate_once(config, policy, plan, plan.base_seed + static_cast<std::uint64_t>(r));
  });
  return reduce_replications(config, reps);
}

Estimate estimate_serial(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan) {
  plan.validate(config.num_classes());
  const auto reps = run_replications_serial(plan.replications, [&](int r) {
    return simulate_once(config, policy, plan, plan.base_seed + static_cast<std::uint64_t>(r));
  });
  return reduce_replications(config, reps);
}

}  // namespace malsched::ctmc
