#include <algorithm>
#include <random>

#include "doctest.h"
#include "malsched/error.hpp"
#include "malsched/policy.hpp"

using namespace malsched;

namespace {

SystemConfig three_class_k10() {
  return resolve_config(10,
                        {{SizeDist::exponential(0.2), 1.0 / 3, ParallelismRule::constant(1)},
                         {SizeDist::exponential(0.05), 1.0 / 3, ParallelismRule::constant(4)},
                         {SizeDist::exponential(0.3), 1.0 / 3, ParallelismRule::full()}},
                        FixedRho{0.5});
}

std::vector<int> one_based(std::vector<int> v) {
  for (int& x : v) ++x;
  return v;
}

}  // namespace

TEST_CASE("priority orders") {
  const auto fig = resolve_config(256, four_class_mix(), PowerLawAlpha{2.0, 0.75});
  CHECK(one_based(priority_order(Lpf{}, fig)) == std::vector<int>{1, 2, 3, 4});
  CHECK(one_based(priority_order(Serpt{}, fig)) == std::vector<int>{3, 1, 4, 2});
  CHECK(one_based(priority_order(SingleFast{SingleFast::Order::CMu, {}}, fig)) == std::vector<int>{3, 1, 4, 2});
  CHECK(one_based(priority_order(SingleFast{SingleFast::Order::Lpf1, {}}, fig)) == std::vector<int>{1, 2, 3, 4});
  CHECK(one_based(priority_order(FixedPriority{{3, 2, 1, 0}}, fig)) == std::vector<int>{4, 3, 2, 1});

  const auto equal = resolve_config(4,
                                    {{SizeDist::exponential(1.0), 0.5, ParallelismRule::constant(1)},
                                     {SizeDist::exponential(1.0), 0.5, ParallelismRule::full()}},
                                    FixedRho{0.5});
  CHECK(one_based(priority_order(Serpt{}, equal)) == std::vector<int>{1, 2});

  bool threw = false;
  try {
    priority_order(Thresh{TauRule::k_log_k()}, fig);
  } catch (const Error& e) {
    threw = e.kind() == ErrorKind::NotAPriorityPolicy;
  }
  CHECK(threw);
  CHECK_THROWS_AS(priority_order(FixedPriority{{0, 0, 1, 2}}, fig), Error);
  CHECK_THROWS_AS(priority_order(FixedPriority{{0, 1}}, fig), Error);
}

TEST_CASE("allocation examples") {
  const auto cfg = three_class_k10();
  const StateCounts n = {3, 2, 4};
  CHECK(allocate(Lpf{}, n, cfg) == Allocation{3, 7, 0});
  CHECK(allocate(Serpt{}, n, cfg) == Allocation{0, 0, 10});
  const PolicySpec thresh = Thresh{TauRule::fixed(20)};
  CHECK(allocate(thresh, n, cfg) == Allocation{3, 7, 0});
  CHECK(allocate(thresh, StateCounts{30, 2, 4}, cfg) == Allocation{0, 0, 10});
  CHECK_THROWS_AS(allocate(Lpf{}, StateCounts{1, 2}, cfg), Error);
}

TEST_CASE("THRESH boundary belongs to the LPF branch") {
  const auto cfg = three_class_k10();
  const PolicySpec thresh = Thresh{TauRule::fixed(9)};
  CHECK(allocate(thresh, StateCounts{3, 2, 4}, cfg) == allocate(Lpf{}, StateCounts{3, 2, 4}, cfg));
  CHECK(allocate(thresh, StateCounts{4, 2, 4}, cfg) == allocate(Serpt{}, StateCounts{4, 2, 4}, cfg));
}

TEST_CASE("tau rules") {
  CHECK(TauRule::k_log_k().eval(10) == 24);  // ceil(10 ln 10) = ceil(23.03)
  CHECK(TauRule::k_log_k().eval(1) == 1);
  CHECK(TauRule::k_log_k().eval(16) == 45);
  CHECK(TauRule::multiple(2).eval(8) == 16);
  CHECK(TauRule::fixed(20).eval(1000) == 20);
  CHECK(TauRule::fixed(0.1).eval(5) >= 1);
}

TEST_CASE("policy strings round-trip") {
  for (const std::string s : {"lpf", "serpt", "thresh", "thresh:tau=2k", "thresh:tau=20", "prio:2,1,3", "cmu", "lpf1",
                              "sf:3,1,2"}) {
    CHECK(policy_name(parse_policy(s)) == s);
  }
  CHECK(std::holds_alternative<Thresh>(parse_policy("thresh:tau=klogk")));
  for (const std::string s : {"", "lfp", "thresh:tau=", "thresh:tau=-1", "prio:", "prio:0,1", "prio:a", "sf:"}) {
    CHECK_THROWS_AS(parse_policy(s), Error);
  }
}

TEST_CASE("single fast server") {
  const auto cfg = resolve_config(4,
                                  {{SizeDist::exponential(2.0), 0.5, ParallelismRule::constant(1)},
                                   {SizeDist::exponential(1.0), 0.5, ParallelismRule::full()}},
                                  FixedRho{0.5});
  const SingleFast cmu{SingleFast::Order::CMu, {}};
  auto s = single_fast_rate(cmu, {1, 5}, cfg);
  CHECK(s.cls == 0);
  CHECK(s.rate == doctest::Approx(8.0));
  CHECK(single_fast_rate(cmu, {0, 0}, cfg).idle());
  CHECK(single_fast_rate(cmu, {0, 0}, cfg).rate == 0.0);
  const SingleFast lpf1{SingleFast::Order::Lpf1, {}};
  s = single_fast_rate(lpf1, {0, 3}, cfg);
  CHECK(s.cls == 1);
  CHECK(s.rate == doctest::Approx(4.0));
  CHECK_THROWS_AS(allocate(cmu, {1, 1}, cfg), Error);
}

// Random states over several configs: feasibility, work conservation, and the
// LPF prefix identity.
TEST_CASE("allocation properties on random states") {
  std::mt19937_64 gen(12345);
  const std::vector<PolicySpec> policies = {Lpf{}, Serpt{}, Thresh{TauRule::fixed(7)}, FixedPriority{{2, 0, 1}}};
  for (int k : {1, 2, 5, 16, 100}) {
    const auto cfg = resolve_config(k,
                                    {{SizeDist::exponential(0.7), 0.3, ParallelismRule::constant(1)},
                                     {SizeDist::exponential(1.9), 0.3, ParallelismRule::log2()},
                                     {SizeDist::exponential(0.4), 0.4, ParallelismRule::full()}},
                                    FixedRho{0.6});
    std::uniform_int_distribution<std::int64_t> cnt(0, 12);
    for (int trial = 0; trial < 500; ++trial) {
      const StateCounts n = {cnt(gen), cnt(gen), cnt(gen)};
      std::int64_t demand = 0;
      for (int i = 0; i < 3; ++i) demand += n[i] * cfg.classes[i].c;
      for (const auto& p : policies) {
        const auto a = allocate(p, n, cfg);
        std::int64_t used = 0;
        for (int i = 0; i < 3; ++i) {
          CHECK(a[i] >= 0);
          CHECK(a[i] <= n[i] * cfg.classes[i].c);
          used += a[i];
        }
        CHECK(used == std::min<std::int64_t>(k, demand));
      }
      const auto a = allocate(Lpf{}, n, cfg);
      std::int64_t prefix_a = 0;
      std::int64_t prefix_demand = 0;
      for (int i = 0; i < 3; ++i) {
        prefix_a += a[i];
        prefix_demand += n[i] * cfg.classes[i].c;
        CHECK(prefix_a == std::min<std::int64_t>(k, prefix_demand));
      }
    }
  }
}

TEST_CASE("THRESH equals LPF below tau and SERPT above, exhaustively") {
  const auto cfg = resolve_config(6,
                                  {{SizeDist::exponential(0.5), 0.5, ParallelismRule::constant(1)},
                                   {SizeDist::exponential(2.0), 0.5, ParallelismRule::full()}},
                                  FixedRho{0.5});
  for (std::int64_t tau = 1; tau <= 15; ++tau) {
    const PolicySpec th = Thresh{TauRule::fixed(static_cast<double>(tau))};
    for (std::int64_t n1 = 0; n1 <= 12; ++n1) {
      for (std::int64_t n2 = 0; n2 <= 12; ++n2) {
        const StateCounts n = {n1, n2};
        const auto expect = (n1 + n2 <= tau) ? allocate(Lpf{}, n, cfg) : allocate(Serpt{}, n, cfg);
        CHECK(allocate(th, n, cfg) == expect);
      }
    }
  }
}

TEST_CASE("Allocator matches allocate") {
  const auto cfg = three_class_k10();
  const std::vector<PolicySpec> policies = {Lpf{}, Serpt{}, Thresh{TauRule::fixed(5)}, FixedPriority{{1, 2, 0}}};
  for (const auto& p : policies) {
    const Allocator alloc(p, cfg);
    for (std::int64_t a = 0; a < 5; ++a) {
      for (std::int64_t b = 0; b < 5; ++b) {
        for (std::int64_t c = 0; c < 5; ++c) {
          const StateCounts n = {a, b, c};
          Allocation out(3);
          alloc(n, a + b + c, out);
          CHECK(out == allocate(p, n, cfg));
        }
      }
    }
  }
}
