#include "malsched/exact.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "malsched/simulation.hpp"

namespace malsched::exact {

void TruncationSpec::validate() const {
  if (cap < 1) throw Error(ErrorKind::BadSpec, "truncation cap must be >= 1");
  if (!(boundary_tolerance > 0.0 && boundary_tolerance < 1.0)) {
    throw Error(ErrorKind::BadSpec, "boundary_tolerance must lie in (0,1)");
  }
}

namespace {

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// States of one class: count n in [0, cap] plus the phases of the first
// min(n, window) jobs, packed base-B with the head job in the lowest digit.
struct LocalSpace {
  int branches = 1;
  int window = 0;
  int cap = 0;
  std::vector<double> prob;
  std::vector<double> rate;
  std::vector<std::int64_t> base;  // first local index for each n
  std::vector<std::int64_t> pow_b;

  LocalSpace(const ResolvedClass& rc, int k, int cap_) : cap(cap_) {
    for (const auto& b : rc.spec.size.branches()) {
      prob.push_back(b.prob);
      rate.push_back(b.rate);
    }
    branches = static_cast<int>(prob.size());
    window = branches == 1 ? 0 : (k + rc.c - 1) / rc.c;
    pow_b.resize(static_cast<std::size_t>(window) + 1);
    for (int j = 0; j <= window; ++j) pow_b[static_cast<std::size_t>(j)] = ipow(branches, j);
    base.resize(static_cast<std::size_t>(cap) + 2);
    base[0] = 0;
    for (int n = 0; n <= cap; ++n) {
      const std::int64_t width = pow_b[static_cast<std::size_t>(std::min(n, window))];
      if (width > kMaxStates) throw Error(ErrorKind::StateSpaceTooLarge, "phase window too wide");
      base[static_cast<std::size_t>(n) + 1] = base[static_cast<std::size_t>(n)] + width;
      if (base[static_cast<std::size_t>(n) + 1] > kMaxStates) {
        throw Error(ErrorKind::StateSpaceTooLarge, "per-class state space exceeds limit");
      }
    }
  }

  std::int64_t size() const { return base[static_cast<std::size_t>(cap) + 1]; }

  int count_of(std::int64_t local) const {
    const auto it = std::upper_bound(base.begin(), base.end(), local);
    return static_cast<int>(it - base.begin()) - 1;
  }

  std::int64_t index(int n, std::int64_t code) const { return base[static_cast<std::size_t>(n)] + code; }

  int phase_at(std::int64_t code, int pos) const {
    return static_cast<int>((code / pow_b[static_cast<std::size_t>(pos)]) % branches);
  }
};

struct Edge {
  std::int64_t to;
  double rate;
};

struct ChainModel {
  const SystemConfig& config;
  std::vector<LocalSpace> spaces;
  std::vector<std::int64_t> stride;
  std::int64_t num_states = 1;
  std::optional<Allocator> allocator;
  std::vector<int> fast_order;

  ChainModel(const SystemConfig& cfg, const PolicySpec& policy, int cap) : config(cfg) {
    for (const auto& rc : cfg.classes) spaces.emplace_back(rc, cfg.k, cap);
    stride.resize(spaces.size());
    for (std::size_t i = spaces.size(); i-- > 0;) {
      stride[i] = num_states;
      const double next = static_cast<double>(num_states) * static_cast<double>(spaces[i].size());
      if (next > static_cast<double>(kMaxStates)) {
        throw Error(ErrorKind::StateSpaceTooLarge,
                    "truncated chain would exceed " + std::to_string(kMaxStates) + " states");
      }
      num_states *= spaces[i].size();
    }
    if (const auto* sf = std::get_if<SingleFast>(&policy)) {
      fast_order = priority_order(*sf, cfg);
    } else {
      allocator.emplace(policy, cfg);
    }
  }

  void decode(std::int64_t s, std::vector<std::int64_t>& local, std::vector<std::int64_t>& n) const {
    for (std::size_t i = 0; i < spaces.size(); ++i) {
      local[i] = (s / stride[i]) % spaces[i].size();
      n[i] = spaces[i].count_of(local[i]);
    }
  }

  void edges_from(std::int64_t s, std::vector<Edge>& out, std::vector<std::int64_t>& local,
                  std::vector<std::int64_t>& n, std::vector<std::int64_t>& alloc) const {
    out.clear();
    decode(s, local, n);
    const std::size_t nc = spaces.size();
    std::int64_t total = 0;
    for (const auto v : n) total += v;

    std::fill(alloc.begin(), alloc.end(), 0);
    std::vector<double> fast_rate;
    if (allocator) {
      (*allocator)(n, total, alloc);
    } else {
      for (const int j : fast_order) {
        if (n[static_cast<std::size_t>(j)] > 0) {
          alloc[static_cast<std::size_t>(j)] = config.k;  // whole fast server
          break;
        }
      }
    }

    for (std::size_t i = 0; i < nc; ++i) {
      const auto& sp = spaces[i];
      const int ni = static_cast<int>(n[i]);
      const std::int64_t code = local[i] - sp.base[static_cast<std::size_t>(ni)];
      const std::int64_t here = local[i];
      const double lambda = config.classes[i].lambda;

      if (ni < sp.cap) {
        if (ni < sp.window) {
          for (int b = 0; b < sp.branches; ++b) {
            const std::int64_t nxt = sp.index(ni + 1, code + b * sp.pow_b[static_cast<std::size_t>(ni)]);
            out.push_back({s + (nxt - here) * stride[i], lambda * sp.prob[static_cast<std::size_t>(b)]});
          }
        } else {
          const std::int64_t nxt = sp.index(ni + 1, code);
          out.push_back({s + (nxt - here) * stride[i], lambda});
        }
      }

      const std::int64_t servers = alloc[i];
      if (servers <= 0) continue;
      if (sp.branches == 1) {
        const std::int64_t nxt = sp.index(ni - 1, 0);
        out.push_back({s + (nxt - here) * stride[i], static_cast<double>(servers) * sp.rate[0]});
        continue;
      }
      // Phase-tracked class: servers go to jobs in arrival order, c each.
      const std::int64_t c = config.classes[i].c;
      const int len = std::min(ni, sp.window);
      std::int64_t left = servers;
      for (int pos = 0; pos < len && left > 0; ++pos) {
        const std::int64_t m = std::min(c, left);
        left -= m;
        const double hazard = static_cast<double>(m) * sp.rate[static_cast<std::size_t>(sp.phase_at(code, pos))];
        const std::int64_t low = code % sp.pow_b[static_cast<std::size_t>(pos)];
        const std::int64_t high = code / sp.pow_b[static_cast<std::size_t>(pos) + 1];
        const std::int64_t removed = low + high * sp.pow_b[static_cast<std::size_t>(pos)];
        if (ni > sp.window) {
          // The next waiting job enters the tracked window with a fresh phase.
          for (int b = 0; b < sp.branches; ++b) {
            const std::int64_t nxt =
                sp.index(ni - 1, removed + b * sp.pow_b[static_cast<std::size_t>(sp.window) - 1]);
            out.push_back({s + (nxt - here) * stride[i], hazard * sp.prob[static_cast<std::size_t>(b)]});
          }
        } else {
          const std::int64_t nxt = sp.index(ni - 1, removed);
          out.push_back({s + (nxt - here) * stride[i], hazard});
        }
      }
    }
  }

  Generator build() const {
    Generator g;
    g.num_states = num_states;
    g.row_start.reserve(static_cast<std::size_t>(num_states) + 1);
    g.row_start.push_back(0);
    std::vector<Edge> edges;
    const std::size_t nc = spaces.size();
    std::vector<std::int64_t> local(nc), n(nc), alloc(nc);
    for (std::int64_t s = 0; s < num_states; ++s) {
      edges_from(s, edges, local, n, alloc);
      for (const auto& e : edges) {
        if (e.rate <= 0.0) continue;
        g.target.push_back(e.to);
        g.rate.push_back(e.rate);
      }
      g.row_start.push_back(static_cast<std::int64_t>(g.target.size()));
    }
    return g;
  }
};

StationaryResult solve_chain(const SystemConfig& config, const PolicySpec& policy,
                             const TruncationSpec& trunc) {
  trunc.validate();
  const ChainModel model(config, policy, trunc.cap);
  const Generator gen = model.build();
  SolveResult sol = solve_stationary(gen);

  const std::size_t nc = model.spaces.size();
  StationaryResult res;
  res.num_states = gen.num_states;
  res.residual = sol.residual;
  res.used_iterative = sol.iterative;
  res.mean_n.assign(nc, 0.0);

  // Aggregate by counts on a (cap+1)^l grid.
  const std::int64_t side = trunc.cap + 1;
  std::int64_t grid = 1;
  for (std::size_t i = 0; i < nc; ++i) grid *= side;
  std::vector<double> by_counts(static_cast<std::size_t>(grid), 0.0);

  std::vector<std::int64_t> local(nc), n(nc);
  for (std::int64_t s = 0; s < gen.num_states; ++s) {
    const double p = sol.pi[static_cast<std::size_t>(s)];
    model.decode(s, local, n);
    bool boundary = false;
    std::int64_t key = 0;
    for (std::size_t i = 0; i < nc; ++i) {
      res.mean_n[i] += p * static_cast<double>(n[i]);
      boundary = boundary || n[i] == trunc.cap;
      key = key * side + n[i];
    }
    if (boundary) res.boundary_mass += p;
    by_counts[static_cast<std::size_t>(key)] += p;
  }

  if (res.boundary_mass > trunc.boundary_tolerance) {
    std::ostringstream os;
    os << "boundary mass " << res.boundary_mass << " exceeds tolerance " << trunc.boundary_tolerance
       << " at cap " << trunc.cap;
    throw Error(ErrorKind::TruncationInsufficient, os.str());
  }

  for (std::size_t i = 0; i < nc; ++i) {
    res.mean_t.push_back(res.mean_n[i] / config.classes[i].lambda);
    res.total_mean_n += res.mean_n[i];
    res.mean_t_aggregate += config.classes[i].spec.p * res.mean_t.back();
  }
  for (std::int64_t key = 0; key < grid; ++key) {
    const double p = by_counts[static_cast<std::size_t>(key)];
    if (p <= 1e-12) continue;
    std::vector<int> counts(nc);
    std::int64_t rest = key;
    for (std::size_t i = nc; i-- > 0;) {
      counts[i] = static_cast<int>(rest % side);
      rest /= side;
    }
    res.distribution.emplace_back(std::move(counts), p);
  }
  return res;
}

void normalize(std::vector<double>& pi) {
  double sum = 0.0;
  for (const double v : pi) sum += v;
  for (double& v : pi) v /= sum;
}

struct Incoming {
  std::vector<std::int64_t> start;
  std::vector<std::int64_t> source;
  std::vector<double> rate;
  std::vector<double> out_rate;
};

Incoming transpose(const Generator& gen) {
  const auto ns = static_cast<std::size_t>(gen.num_states);
  Incoming in;
  in.start.assign(ns + 1, 0);
  in.out_rate.assign(ns, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    for (auto e = gen.row_start[s]; e < gen.row_start[s + 1]; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      ++in.start[static_cast<std::size_t>(gen.target[ue]) + 1];
      in.out_rate[s] += gen.rate[ue];
    }
  }
  for (std::size_t s = 0; s < ns; ++s) in.start[s + 1] += in.start[s];
  in.source.resize(gen.target.size());
  in.rate.resize(gen.target.size());
  std::vector<std::int64_t> fill(in.start.begin(), in.start.end() - 1);
  for (std::size_t s = 0; s < ns; ++s) {
    for (auto e = gen.row_start[s]; e < gen.row_start[s + 1]; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      const auto slot = static_cast<std::size_t>(fill[static_cast<std::size_t>(gen.target[ue])]++);
      in.source[slot] = static_cast<std::int64_t>(s);
      in.rate[slot] = gen.rate[ue];
    }
  }
  return in;
}

constexpr double kDamping = 0.5;
constexpr int kMaxJacobiIterations = 2'000'000;
constexpr int kResidualCheckEvery = 50;

// One damped Jacobi sweep: pi'_j = (1-w) pi_j + w (sum_i pi_i q_ij) / q_j.
void jacobi_sweep_serial(const Incoming& in, const std::vector<double>& pi, std::vector<double>& next) {
  const auto ns = static_cast<std::int64_t>(pi.size());
  for (std::int64_t j = 0; j < ns; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    double flow = 0.0;
    for (auto e = in.start[uj]; e < in.start[uj + 1]; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      flow += pi[static_cast<std::size_t>(in.source[ue])] * in.rate[ue];
    }
    next[uj] = (1.0 - kDamping) * pi[uj] + kDamping * flow / in.out_rate[uj];
  }
}

void jacobi_sweep_parallel(const Incoming& in, const std::vector<double>& pi, std::vector<double>& next,
                           int threads) {
  const auto ns = static_cast<std::int64_t>(pi.size());
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t j = 0; j < ns; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    double flow = 0.0;
    for (auto e = in.start[uj]; e < in.start[uj + 1]; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      flow += pi[static_cast<std::size_t>(in.source[ue])] * in.rate[ue];
    }
    next[uj] = (1.0 - kDamping) * pi[uj] + kDamping * flow / in.out_rate[uj];
  }
}

template <typename Sweep>
SolveResult jacobi(const Generator& gen, Sweep sweep) {
  const Incoming in = transpose(gen);
  const auto ns = static_cast<std::size_t>(gen.num_states);
  for (std::size_t s = 0; s < ns; ++s) {
    if (!(in.out_rate[s] > 0.0)) throw Error(ErrorKind::BadSpec, "absorbing state in generator");
  }
  SolveResult res;
  res.iterative = true;
  std::vector<double> pi(ns, 1.0 / static_cast<double>(ns));
  std::vector<double> next(ns);
  for (int it = 1; it <= kMaxJacobiIterations; ++it) {
    sweep(in, pi, next);
    pi.swap(next);
    if (it % kResidualCheckEvery == 0) {
      normalize(pi);
      res.residual = generator_residual(gen, pi);
      if (res.residual <= kResidualTarget) {
        res.pi = std::move(pi);
        return res;
      }
    }
  }
  throw Error(ErrorKind::SolverDidNotConverge,
              "Jacobi residual " + std::to_string(res.residual) + " above target");
}

}  // namespace

double generator_residual(const Generator& gen, std::span<const double> pi) {
  const auto ns = static_cast<std::size_t>(gen.num_states);
  std::vector<double> r(ns, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    for (auto e = gen.row_start[s]; e < gen.row_start[s + 1]; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      const double f = pi[s] * gen.rate[ue];
      r[static_cast<std::size_t>(gen.target[ue])] += f;
      r[s] -= f;
    }
  }
  double worst = 0.0;
  for (const double v : r) worst = std::max(worst, std::abs(v));
  return worst;
}

SolveResult solve_stationary_direct(const Generator& gen) {
  using SpMat = Eigen::SparseMatrix<double>;
  const auto ns = gen.num_states;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(gen.target.size() * 2 + static_cast<std::size_t>(ns));
  // Rows of Q^T; row 0 is replaced by the normalization sum(pi) = 1.
  for (std::int64_t s = 0; s < ns; ++s) {
    const auto us = static_cast<std::size_t>(s);
    double out = 0.0;
    for (auto e = gen.row_start[us]; e < gen.row_start[us + 1]; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      out += gen.rate[ue];
      if (gen.target[ue] != 0) trip.emplace_back(gen.target[ue], s, gen.rate[ue]);
    }
    if (s != 0) trip.emplace_back(s, s, -out);
    trip.emplace_back(0, s, 1.0);
  }
  SpMat a(ns, ns);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ns);
  rhs(0) = 1.0;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::SolverDidNotConverge, "sparse LU failed");
  const Eigen::VectorXd x = lu.solve(rhs);
  SolveResult res;
  res.pi.assign(x.data(), x.data() + ns);
  for (double& v : res.pi) {
    if (v < -1e-12) throw Error(ErrorKind::SolverDidNotConverge, "negative stationary mass");
    v = std::max(v, 0.0);
  }
  normalize(res.pi);
  res.residual = generator_residual(gen, res.pi);
  if (res.residual > kResidualTarget) {
    throw Error(ErrorKind::SolverDidNotConverge,
                "sparse LU residual " + std::to_string(res.residual) + " above target");
  }
  return res;
}

SolveResult solve_stationary_jacobi(const Generator& gen, int threads) {
  return jacobi(gen, [threads](const Incoming& in, const std::vector<double>& pi, std::vector<double>& next) {
    jacobi_sweep_parallel(in, pi, next, threads);
  });
}

SolveResult solve_stationary_jacobi_serial(const Generator& gen) {
  return jacobi(gen, jacobi_sweep_serial);
}

SolveResult solve_stationary(const Generator& gen) {
  if (gen.num_states <= kDirectSolveLimit) return solve_stationary_direct(gen);
  return solve_stationary_jacobi(gen, replication_threads());
}

StationaryResult stationary_truncated(const SystemConfig& config, const PolicySpec& policy,
                                      const TruncationSpec& trunc) {
  if (!config.all_exponential()) {
    throw Error(ErrorKind::HyperExpUnsupported, "use stationary_phase_expanded for hyperexponential classes");
  }
  return solve_chain(config, policy, trunc);
}

StationaryResult stationary_phase_expanded(const SystemConfig& config, const PolicySpec& policy,
                                           const TruncationSpec& trunc) {
  if (is_single_fast(policy) && !config.all_exponential()) {
    throw Error(ErrorKind::HyperExpUnsupported, "single-fast-server chains need exponential classes");
  }
  return solve_chain(config, policy, trunc);
}

void write_distribution(const StationaryResult& result, int num_classes, std::ostream& os) {
  for (int i = 0; i < num_classes; ++i) os << "n_" << i + 1 << ',';
  os << "prob\n";
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& [counts, p] : result.distribution) {
    for (const int v : counts) os << v << ',';
    os << p << '\n';
  }
  os.precision(old_precision);
}

PriorityQueueResult priority_mm1_speed_k(const SystemConfig& config, std::span<const int> order) {
  const auto nc = config.classes.size();
  if (order.size() != nc) throw Error(ErrorKind::DimensionMismatch, "order length must equal class count");
  if (!config.all_exponential()) throw Error(ErrorKind::HyperExpUnsupported, "priority formulas need exponential classes");
  if (config.rho >= 1.0) throw Error(ErrorKind::UnstableSystem, "rho >= 1");

  const double kd = static_cast<double>(config.k);
  PriorityQueueResult res;
  res.mean_t.assign(nc, 0.0);
  res.mean_n.assign(nc, 0.0);
  double sigma_prev = 0.0;
  double residual_work = 0.0;  // sum_{j<=i} lambda_j / (k mu_j)^2
  for (const int idx : order) {
    const auto& c = config.classes[static_cast<std::size_t>(idx)];
    const double speed_rate = kd * c.mu;
    const double sigma = sigma_prev + c.rho;
    if (sigma >= 1.0) throw Error(ErrorKind::UnstableSystem, "cumulative load reaches 1");
    residual_work += c.lambda / (speed_rate * speed_rate);
    const double t = (1.0 / speed_rate) / (1.0 - sigma_prev) +
                     residual_work / ((1.0 - sigma_prev) * (1.0 - sigma));
    res.mean_t[static_cast<std::size_t>(idx)] = t;
    res.mean_n[static_cast<std::size_t>(idx)] = c.lambda * t;
    res.sigma.push_back(sigma);
    sigma_prev = sigma;
  }
  for (std::size_t i = 0; i < nc; ++i) res.mean_t_aggregate += config.classes[i].spec.p * res.mean_t[i];
  return res;
}

PriorityQueueResult cmu_system(const SystemConfig& config) {
  const auto order = priority_order(SingleFast{SingleFast::Order::CMu, {}}, config);
  return priority_mm1_speed_k(config, order);
}

double thresh_t2_bound(int k, double mu2, double rho2, double tau) {
  if (!(rho2 > 0.0 && rho2 < 1.0)) throw Error(ErrorKind::UnstableSystem, "rho_2 must lie in (0,1)");
  const double scale = static_cast<double>(k) * mu2 * rho2;
  return 2.0 * tau / scale + 4.0 / (scale * (1.0 - rho2));
}

double thresh_t2_bound(const SystemConfig& config, double tau) {
  if (config.num_classes() != 2) {
    throw Error(ErrorKind::WrongClassCount, "THRESH class-2 bound needs exactly 2 classes");
  }
  const auto& c2 = config.classes[1];
  return thresh_t2_bound(config.k, c2.mu, c2.rho, tau);
}

std::int64_t beta_threshold(int k, double rho_i, double alpha, int num_classes, int c_i) {
  const double x = (rho_i * static_cast<double>(k) + alpha / static_cast<double>(num_classes)) /
                   static_cast<double>(c_i);
  // Values within round-off of an integer are treated as that integer.
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

std::int64_t beta_threshold(const SystemConfig& config, int cls) {
  if (cls < 0 || cls >= config.num_classes()) throw Error(ErrorKind::DimensionMismatch, "class index out of range");
  const auto& c = config.classes[static_cast<std::size_t>(cls)];
  return beta_threshold(config.k, c.rho, config.alpha, config.num_classes(), c.c);
}

}  // namespace malsched::exact
