#include "malsched/commands.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "malsched/ctmc_engine.hpp"
#include "malsched/event_engine.hpp"
#include "malsched/exact.hpp"

namespace malsched {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadSpec:
    case ErrorKind::InfeasibleLoad:
    case ErrorKind::NotAPriorityPolicy:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::UnstableSystem:
    case ErrorKind::WrongClassCount:
      return kExitConfig;
    case ErrorKind::TruncationInsufficient:
      return kExitTruncation;
    case ErrorKind::HyperExpUnsupported:
    case ErrorKind::NumericalHorizonTooSmall:
    case ErrorKind::StateSpaceTooLarge:
    case ErrorKind::SolverDidNotConverge:
      return kExitEngine;
  }
  return kExitEngine;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::BadSpec, "cannot write " + path.string());
  return f;
}

SimPlan plan_for(const ConfigFile& cf, const CommandOptions& opts, const SystemConfig& config) {
  PlanSpec spec = cf.plan;
  if (opts.time) spec.measure_time = *opts.time;
  if (opts.warmup) spec.warmup_time = *opts.warmup;
  if (opts.reps) spec.replications = *opts.reps;
  if (opts.seed) spec.seed = *opts.seed;
  SimPlan plan = spec.resolve(config);
  plan.validate(config.num_classes());
  return plan;
}

std::vector<PolicySpec> policies_for(const ConfigFile& cf, const CommandOptions& opts) {
  const auto& names = opts.policies.empty() ? cf.policies : opts.policies;
  if (names.empty()) throw Error(ErrorKind::BadSpec, "no policy given (config 'policy' or --policy)");
  std::vector<PolicySpec> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(parse_policy(n));
  return out;
}

int threads_for(const CommandOptions& opts) { return opts.threads ? *opts.threads : replication_threads(); }

EngineKind engine_for(const ConfigFile& cf, const CommandOptions& opts) {
  return opts.engine ? *opts.engine : cf.engine;
}

int require_k(const ConfigFile& cf) {
  if (!cf.k) throw Error(ErrorKind::BadSpec, "config needs 'k'");
  return *cf.k;
}

const ScalingRegime& require_regime(const ConfigFile& cf) {
  if (!cf.regime) throw Error(ErrorKind::BadSpec, "config needs 'regime'");
  return *cf.regime;
}

// Runs `body` and converts library errors into exit codes.
template <typename Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "malsched: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "malsched: " << e.what() << '\n';
    return kExitEngine;
  }
}

void dump_debug_trace(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan,
                      EngineKind engine, const CommandOptions& opts) {
  if (engine == EngineKind::Ctmc && opts.trajectory) {
    auto f = open_output(*opts.trajectory);
    f << "time";
    for (int i = 1; i <= config.num_classes(); ++i) f << ",n_" << i;
    for (int i = 1; i <= config.num_classes(); ++i) f << ",a_" << i;
    f << '\n';
    ctmc::simulate_once(config, policy, plan, plan.base_seed, &f);
  }
  if (engine == EngineKind::Event && opts.trace) {
    auto f = open_output(*opts.trace);
    f << "id,class,arrival,departure,phase_rate\n";
    event::RunOptions ro;
    ro.trace = &f;
    event::run(config, policy, plan, plan.base_seed, ro);
  }
}

}  // namespace

RunReport simulate_point(const SystemConfig& config, const PolicySpec& policy, const SimPlan& plan_in,
                         EngineKind engine, int threads) {
  SimPlan plan = plan_in;
  plan.tail_thresholds.clear();
  for (int i = 0; i < config.num_classes(); ++i) plan.tail_thresholds.push_back(exact::beta_threshold(config, i));
  Estimate est;
  if (engine == EngineKind::Ctmc) {
    est = ctmc::estimate(config, policy, plan, threads);
  } else {
    if (is_single_fast(policy)) {
      throw Error(ErrorKind::BadSpec, "single-fast-server policies run on the ctmc engine");
    }
    est = event::estimate(config, policy, plan, threads);
  }
  return report_from_estimate(config, policy_name(policy), est);
}

int cmd_simulate(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cf = load_config_file(opts.config);
    const SystemConfig config = resolve_config(require_k(cf), cf.classes, require_regime(cf));
    const auto policies = policies_for(cf, opts);
    if (policies.size() != 1) throw Error(ErrorKind::BadSpec, "simulate takes exactly one policy");
    const SimPlan plan = plan_for(cf, opts, config);
    const EngineKind engine = engine_for(cf, opts);
    const RunReport rep = simulate_point(config, policies.front(), plan, engine, threads_for(opts));
    dump_debug_trace(config, policies.front(), plan, engine, opts);
    write_csv(rep, out);
    return kExitOk;
  });
}

namespace {

// Shared driver for sweep/heavy: one point per (config, policy), error rows on failure.
struct PointLoop {
  const CommandOptions& opts;
  const ConfigFile& cf;
  std::ostream& err;
  RunReport report;
  int succeeded = 0;

  void run(int k, const ScalingRegime& regime, double rho_hint, double alpha_hint,
           const std::vector<PolicySpec>& policies) {
    std::optional<SystemConfig> config;
    try {
      config = resolve_config(k, cf.classes, regime);
    } catch (const Error& e) {
      err << "malsched: k=" << k << ": " << e.what() << '\n';
      for (const auto& p : policies) report.rows.push_back(error_row(k, policy_name(p), rho_hint, alpha_hint));
      return;
    }
    for (const auto& p : policies) {
      try {
        const SimPlan plan = plan_for(cf, opts, *config);
        report.append(simulate_point(*config, p, plan, engine_for(cf, opts), threads_for(opts)));
        ++succeeded;
      } catch (const Error& e) {
        err << "malsched: k=" << k << " policy=" << policy_name(p) << ": " << e.what() << '\n';
        report.rows.push_back(error_row(k, policy_name(p), config->rho, config->alpha));
      }
    }
  }
};

}  // namespace

int cmd_sweep(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cf = load_config_file(opts.config);
    if (cf.k_values.empty()) throw Error(ErrorKind::BadSpec, "sweep needs a non-empty 'k_values'");
    const auto& regime = require_regime(cf);
    const auto policies = policies_for(cf, opts);
    PointLoop loop{opts, cf, err, {}, 0};
    for (const int k : cf.k_values) {
      double alpha_hint = 0.0;
      double rho_hint = 0.0;
      if (const auto* pl = std::get_if<PowerLawAlpha>(&regime)) {
        alpha_hint = pl->a * std::pow(static_cast<double>(k), pl->b);
        rho_hint = 1.0 - alpha_hint / static_cast<double>(k);
      } else {
        rho_hint = std::get<FixedRho>(regime).rho;
        alpha_hint = static_cast<double>(k) * (1.0 - rho_hint);
      }
      loop.run(k, regime, rho_hint, alpha_hint, policies);
    }
    write_csv(loop.report, out);
    return loop.succeeded > 0 ? kExitOk : kExitEngine;
  });
}

int cmd_heavy(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cf = load_config_file(opts.config);
    const int k = require_k(cf);
    const auto& rhos = opts.rho_values.empty() ? cf.rho_values : opts.rho_values;
    if (rhos.empty()) throw Error(ErrorKind::BadSpec, "heavy needs 'rho_values' or --rho");
    const auto policies = policies_for(cf, opts);
    PointLoop loop{opts, cf, err, {}, 0};
    for (const double rho : rhos) {
      loop.run(k, FixedRho{rho}, rho, static_cast<double>(k) * (1.0 - rho), policies);
    }
    write_csv(loop.report, out);
    return loop.succeeded > 0 ? kExitOk : kExitEngine;
  });
}

int cmd_oracle(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cf = load_config_file(opts.config);
    const SystemConfig config = resolve_config(require_k(cf), cf.classes, require_regime(cf));
    const auto policies = policies_for(cf, opts);
    exact::TruncationSpec trunc;
    if (cf.cap) trunc.cap = *cf.cap;
    if (opts.cap) trunc.cap = *opts.cap;

    RunReport rep;
    std::vector<exact::StationaryResult> solved;
    for (const auto& policy : policies) {
      const auto res = exact::stationary_phase_expanded(config, policy, trunc);
      Estimate est;
      est.replications = 1;
      const auto nc = static_cast<std::size_t>(config.num_classes());
      est.classes.resize(nc);
      for (std::size_t i = 0; i < nc; ++i) {
        const auto beta = exact::beta_threshold(config, static_cast<int>(i));
        double tail = 0.0;
        for (const auto& [counts, p] : res.distribution) {
          if (counts[i] >= beta) tail += p;
        }
        est.classes[i].mean_n = {res.mean_n[i], 0.0};
        est.classes[i].mean_t = {res.mean_t[i], 0.0};
        est.classes[i].tail = MeanCi{tail, 0.0};
      }
      est.mean_n = {res.total_mean_n, 0.0};
      est.mean_t = {res.mean_t_aggregate, 0.0};
      rep.append(report_from_estimate(config, policy_name(policy), est));
      solved.push_back(res);
    }
    if (opts.dist) {
      auto f = open_output(*opts.dist);
      write_distribution(solved.front(), config.num_classes(), f);
    }
    write_csv(rep, out);
    return kExitOk;
  });
}

int cmd_bounds(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cf = load_config_file(opts.config);
    std::vector<int> ks = cf.k_values;
    if (cf.k) ks.insert(ks.begin(), *cf.k);
    if (ks.empty()) throw Error(ErrorKind::BadSpec, "config needs 'k' or 'k_values'");
    const auto& regime = require_regime(cf);

    std::ostringstream buf;
    buf << kBoundsHeader << '\n';
    for (const int k : ks) {
      const SystemConfig config = resolve_config(k, cf.classes, regime);
      const auto service = lpf_service_lower_bound(config);
      std::optional<exact::PriorityQueueResult> cmu;
      if (config.all_exponential()) cmu = exact::cmu_system(config);
      std::optional<double> t2;
      if (config.num_classes() == 2) {
        const double tau = opts.tau ? *opts.tau : static_cast<double>(TauRule::k_log_k().eval(k));
        t2 = exact::thresh_t2_bound(config, tau);
      }
      const auto prefix = [&](std::ostream& os) {
        os << k << ',' << format_number(config.rho) << ',' << format_number(config.alpha) << ',';
      };
      for (int i = 0; i < config.num_classes(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        prefix(buf);
        buf << i + 1 << ',' << format_number(service.per_class[ui]) << ',';
        if (cmu) buf << format_number(cmu->mean_t[ui]);
        buf << ',' << exact::beta_threshold(config, i) << ',';
        if (t2 && i == 1) buf << format_number(*t2);
        buf << '\n';
      }
      prefix(buf);
      buf << "all," << format_number(service.aggregate) << ',';
      if (cmu) buf << format_number(cmu->mean_t_aggregate);
      buf << ",,\n";
    }
    out << buf.str();
    return kExitOk;
  });
}

}  // namespace malsched
