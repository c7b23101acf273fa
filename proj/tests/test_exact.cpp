#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "malsched/bundled.hpp"
#include "malsched/ctmc_engine.hpp"
#include "malsched/error.hpp"
#include "malsched/exact.hpp"
#include "oracles.hpp"

using namespace malsched;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::BadSpec;
}

SystemConfig two_class(int k, double mu1, double mu2, int c2_full, double rho, double p1 = 0.5) {
  return resolve_config(k,
                        {{SizeDist::exponential(mu1), p1, ParallelismRule::constant(1)},
                         {SizeDist::exponential(mu2), 1.0 - p1,
                          c2_full ? ParallelismRule::full() : ParallelismRule::constant(2)}},
                        FixedRho{rho});
}

// Birth-death chain on {0..n-1} with rates up/down.
exact::Generator birth_death(std::int64_t n, double up, double down) {
  exact::Generator g;
  g.num_states = n;
  g.row_start.push_back(0);
  for (std::int64_t s = 0; s < n; ++s) {
    if (s + 1 < n) {
      g.target.push_back(s + 1);
      g.rate.push_back(up);
    }
    if (s > 0) {
      g.target.push_back(s - 1);
      g.rate.push_back(down);
    }
    g.row_start.push_back(static_cast<std::int64_t>(g.target.size()));
  }
  return g;
}

}  // namespace

using exact::TruncationSpec;

TEST_CASE("textbook chains") {
  const auto mm1 = resolve_config(3, {{SizeDist::exponential(1.0), 1.0, ParallelismRule::full()}}, FixedRho{0.5});
  CHECK(exact::stationary_truncated(mm1, Lpf{}, TruncationSpec{80, 1e-8}).mean_n[0] ==
        doctest::Approx(1.0).epsilon(1e-6));
  const auto mm2 =
      resolve_config(2, {{SizeDist::exponential(1.0), 1.0, ParallelismRule::constant(1)}}, FixedRho{0.5});
  const auto r = exact::stationary_truncated(mm2, Lpf{}, TruncationSpec{80, 1e-8});
  CHECK(r.mean_n[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  CHECK(r.mean_t[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-6));  // lambda = 1

  for (int k : {3, 4, 7}) {
    for (double rho : {0.3, 0.6, 0.8}) {
      const auto cfg =
          resolve_config(k, {{SizeDist::exponential(0.7), 1.0, ParallelismRule::constant(1)}}, FixedRho{rho});
      const auto s = exact::stationary_truncated(cfg, Lpf{}, TruncationSpec{150, 1e-8});
      CHECK(s.mean_n[0] == doctest::Approx(oracle::mmk_mean_n(k, cfg.lambda_total, 0.7)).epsilon(1e-7));
    }
  }
}

TEST_CASE("truncated chain against a dense solve of the same chain") {
  const auto cfg = two_class(3, 0.8, 1.7, 1, 0.6);
  const int cap = 8;
  const auto res = exact::stationary_truncated(cfg, Serpt{}, TruncationSpec{cap, 0.99});
  const std::size_t side = cap + 1;
  const auto q = [&](std::size_t from, std::size_t to) {
    const std::int64_t n1 = static_cast<std::int64_t>(from % side);
    const std::int64_t n2 = static_cast<std::int64_t>(from / side);
    const std::int64_t m1 = static_cast<std::int64_t>(to % side);
    const std::int64_t m2 = static_cast<std::int64_t>(to / side);
    const auto a = allocate(Serpt{}, {n1, n2}, cfg);
    if (m1 == n1 + 1 && m2 == n2 && n1 < cap) return cfg.classes[0].lambda;
    if (m2 == n2 + 1 && m1 == n1 && n2 < cap) return cfg.classes[1].lambda;
    if (m1 == n1 - 1 && m2 == n2) return cfg.classes[0].mu * static_cast<double>(a[0]);
    if (m2 == n2 - 1 && m1 == n1) return cfg.classes[1].mu * static_cast<double>(a[1]);
    return 0.0;
  };
  const auto pi = oracle::dense_stationary(side * side, q);
  double n1 = 0.0;
  double n2 = 0.0;
  for (std::size_t s = 0; s < pi.size(); ++s) {
    n1 += pi[s] * static_cast<double>(s % side);
    n2 += pi[s] * static_cast<double>(s / side);
  }
  CHECK(res.mean_n[0] == doctest::Approx(n1).epsilon(1e-9));
  CHECK(res.mean_n[1] == doctest::Approx(n2).epsilon(1e-9));
  CHECK(res.boundary_mass > 0.0);
}

TEST_CASE("solver contract on generated chains") {
  const auto g = birth_death(400, 0.7, 1.0);
  for (const auto& sol : {exact::solve_stationary_direct(g), exact::solve_stationary_jacobi(g, 2),
                          exact::solve_stationary_jacobi_serial(g)}) {
    CHECK(sol.residual <= exact::kResidualTarget);
    CHECK(std::accumulate(sol.pi.begin(), sol.pi.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double p : sol.pi) CHECK(p >= 0.0);
    // Geometric stationary law of the truncated birth-death chain.
    CHECK(sol.pi[1] / sol.pi[0] == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(sol.pi[10] == doctest::Approx(0.3 * std::pow(0.7, 10)).epsilon(1e-6));
  }
  const auto par = exact::solve_stationary_jacobi(g, 3);
  const auto ser = exact::solve_stationary_jacobi_serial(g);
  CHECK(par.pi == ser.pi);
  CHECK(par.iterative);
  CHECK_FALSE(exact::solve_stationary_direct(g).iterative);
}

TEST_CASE("truncation, size and distribution errors") {
  const auto cfg = two_class(2, 1.0, 1.0, 1, 0.6);
  CHECK(kind_of([&] { exact::stationary_truncated(cfg, Lpf{}, TruncationSpec{4, 1e-8}); }) ==
        ErrorKind::TruncationInsufficient);
  try {
    exact::stationary_truncated(cfg, Lpf{}, TruncationSpec{4, 1e-8});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("boundary mass") != std::string::npos);
  }
  const auto three = bundled_exponential_configs()[4].resolve();
  CHECK(kind_of([&] { exact::stationary_truncated(three, Lpf{}, TruncationSpec{300, 1e-8}); }) ==
        ErrorKind::StateSpaceTooLarge);
  const auto hyper = bundled_configs().back().resolve();
  CHECK(kind_of([&] { exact::stationary_truncated(hyper, Lpf{}, TruncationSpec{50, 1e-8}); }) ==
        ErrorKind::HyperExpUnsupported);
  CHECK(kind_of([&] { exact::stationary_truncated(cfg, Lpf{}, TruncationSpec{0, 1e-8}); }) == ErrorKind::BadSpec);
  CHECK(kind_of([&] { exact::stationary_truncated(cfg, Lpf{}, TruncationSpec{10, 1.5}); }) == ErrorKind::BadSpec);
}

TEST_CASE("phase expansion reduces to the plain chain for exponential classes") {
  for (const auto& b : bundled_exponential_configs()) {
    if (b.resolve().num_classes() > 2) continue;
    CAPTURE(b.name);
    const auto cfg = b.resolve();
    const TruncationSpec t{b.cap, 1e-8};
    const auto a = exact::stationary_truncated(cfg, Serpt{}, t);
    const auto p = exact::stationary_phase_expanded(cfg, Serpt{}, t);
    for (std::size_t i = 0; i < a.mean_n.size(); ++i) CHECK(p.mean_n[i] == doctest::Approx(a.mean_n[i]).epsilon(1e-8));
  }
}

TEST_CASE("LPF minimises E[N] for equal sizes at small scale") {
  const auto cfg = two_class(2, 1.0, 1.0, 1, 0.6);
  const TruncationSpec t{80, 1e-8};
  const auto lpf = exact::stationary_truncated(cfg, Lpf{}, t);
  const auto serpt = exact::stationary_truncated(cfg, Serpt{}, t);
  const auto rev = exact::stationary_truncated(cfg, FixedPriority{{1, 0}}, t);
  CHECK(lpf.total_mean_n <= serpt.total_mean_n + 1e-12);
  CHECK(lpf.total_mean_n < rev.total_mean_n);
}

TEST_CASE("priority formula examples") {
  const auto cfg = resolve_config(1,
                                  {{SizeDist::exponential(2.0), 2.0 / 3, ParallelismRule::constant(1)},
                                   {SizeDist::exponential(1.0), 1.0 / 3, ParallelismRule::constant(1)}},
                                  FixedRho{0.5});
  CHECK(cfg.classes[0].lambda == doctest::Approx(0.5));
  CHECK(cfg.classes[1].lambda == doctest::Approx(0.25));
  const auto r = exact::cmu_system(cfg);
  CHECK(r.mean_t[0] == doctest::Approx(2.0 / 3.0));
  CHECK(r.mean_t[1] == doctest::Approx(7.0 / 3.0));
  CHECK(r.sigma.back() == doctest::Approx(0.5));
  for (std::size_t i = 0; i < 2; ++i) CHECK(r.mean_n[i] == doctest::Approx(cfg.classes[i].lambda * r.mean_t[i]));

  const auto one = resolve_config(1, {{SizeDist::exponential(1.0), 1.0, ParallelismRule::constant(1)}},
                                  FixedRho{0.5});
  CHECK(exact::cmu_system(one).mean_t[0] == doctest::Approx(2.0));

  auto unstable = one;
  unstable.classes[0].lambda = 1.2;
  unstable.classes[0].rho = 1.2;
  unstable.rho = 1.2;
  CHECK(kind_of([&] { exact::cmu_system(unstable); }) == ErrorKind::UnstableSystem);
}

TEST_CASE("priority formula agrees with an independent derivation and the chain") {
  std::vector<SystemConfig> configs;
  for (const auto& b : bundled_exponential_configs()) {
    if (b.resolve().num_classes() == 2) configs.push_back(b.resolve());
  }
  configs.push_back(two_class(3, 2.0, 0.5, 0, 0.8, 0.3));
  configs.push_back(two_class(4, 0.5, 2.0, 1, 0.9));  // formula-only: the chain needs too large a cap
  for (const auto& cfg : configs) {
    for (const std::vector<int>& order : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
      const auto r = exact::priority_mm1_speed_k(cfg, order);
      std::vector<double> lam, rate;
      for (int i : order) {
        lam.push_back(cfg.classes[static_cast<std::size_t>(i)].lambda);
        rate.push_back(cfg.k * cfg.classes[static_cast<std::size_t>(i)].mu);
      }
      const auto ind = oracle::preemptive_priority_t(lam, rate);
      for (std::size_t j = 0; j < order.size(); ++j) {
        CHECK(r.mean_t[static_cast<std::size_t>(order[j])] == doctest::Approx(ind[j]).epsilon(1e-12));
      }
      if (cfg.rho > 0.85) continue;
      const int cap = cfg.rho > 0.75 ? 300 : 200;
      const auto chain = exact::stationary_truncated(cfg, SingleFast{SingleFast::Order::Explicit, order},
                                                     TruncationSpec{cap, 1e-8});
      for (std::size_t i = 0; i < 2; ++i) CHECK(chain.mean_t[i] == doctest::Approx(r.mean_t[i]).epsilon(1e-4));
    }
  }
}

TEST_CASE("c-mu response time grows like 1/(1-rho)") {
  const auto at = [](double rho) {
    return exact::cmu_system(resolve_config(4, four_class_mix(), FixedRho{rho})).mean_t_aggregate;
  };
  CHECK(at(0.99) / at(0.98) == doctest::Approx(2.0).epsilon(0.10));
  double prev = 0.0;
  for (double rho = 0.05; rho < 0.995; rho += 0.01) {
    const double t = at(rho);
    CHECK(t >= prev);
    prev = t;
  }
}

TEST_CASE("SERPT stays within k*l jobs of the c-mu system") {
  for (const auto& b : bundled_exponential_configs()) {
    CAPTURE(b.name);
    const auto cfg = b.resolve();
    const auto est = ctmc::estimate(cfg, Serpt{}, SimPlan::with_measure(5000, 4));
    const auto cmu = exact::cmu_system(cfg);
    const double cmu_n = std::accumulate(cmu.mean_n.begin(), cmu.mean_n.end(), 0.0);
    CHECK(est.mean_n.mean - cmu_n <= cfg.k * cfg.num_classes() + est.mean_n.half_width);
  }
}

TEST_CASE("THRESH class-2 bound") {
  CHECK(exact::thresh_t2_bound(10, 1.0, 0.5, 20.0) == doctest::Approx(9.6));
  CHECK(exact::thresh_t2_bound(10, 1.0, 0.5, 0.0) == doctest::Approx(4.0 / (10 * 0.5 * 0.5)));
  CHECK(exact::thresh_t2_bound(10, 1.0, 0.999999, 20.0) > 1e5);
  const auto cfg = two_class(10, 0.5, 1.0, 1, 0.8);
  const double rho2 = cfg.classes[1].rho;
  CHECK(exact::thresh_t2_bound(cfg, 20.0) == doctest::Approx(exact::thresh_t2_bound(10, 1.0, rho2, 20.0)));
  const auto three = bundled_exponential_configs()[4].resolve();
  CHECK(kind_of([&] { exact::thresh_t2_bound(three, 20.0); }) == ErrorKind::WrongClassCount);
}

TEST_CASE("beta thresholds") {
  CHECK(exact::beta_threshold(100, 0.2, 20.0, 2, 1) == 30);
  CHECK(exact::beta_threshold(100, 0.2, 20.0, 2, 4) == 8);
  CHECK(exact::beta_threshold(100, 0.2, 20.0, 2, 100) == 1);
  const auto cfg = resolve_config(256, four_class_mix(), PowerLawAlpha{2.0, 0.75});
  for (int i = 0; i < 4; ++i) {
    const auto& c = cfg.classes[static_cast<std::size_t>(i)];
    const double raw = (c.rho * 256 + cfg.alpha / 4) / c.c;
    CHECK(exact::beta_threshold(cfg, i) == static_cast<std::int64_t>(std::ceil(raw - 1e-9)));
  }
}

TEST_CASE("distribution dump") {
  const auto cfg = two_class(2, 1.0, 2.0, 1, 0.5);
  const auto r = exact::stationary_truncated(cfg, Lpf{}, TruncationSpec{60, 1e-8});
  std::ostringstream os;
  exact::write_distribution(r, 2, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "n_1,n_2,prob");
  double total = 0.0;
  double n1 = 0.0;
  while (std::getline(in, line)) {
    int a = 0, b = 0;
    double p = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    ls >> a >> c1 >> b >> c2 >> p;
    CHECK(p > 1e-12);
    total += p;
    n1 += a * p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(n1 == doctest::Approx(r.mean_n[0]).epsilon(1e-8));
}
