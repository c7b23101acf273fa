#include "malsched/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace malsched {

std::int64_t TauRule::eval(int k) const {
  double t = 0.0;
  switch (kind) {
    case Kind::KLogK: t = std::ceil(static_cast<double>(k) * std::log(static_cast<double>(k))); break;
    case Kind::Multiple: t = std::ceil(value * static_cast<double>(k)); break;
    case Kind::Fixed: t = std::ceil(value); break;
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(t));
}

bool is_single_fast(const PolicySpec& policy) { return std::holds_alternative<SingleFast>(policy); }

namespace {

std::vector<int> parse_order(const std::string& list) {
  std::vector<int> order;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      order.push_back(v - 1);
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadSpec, "bad class index '" + item + "' in priority order");
    }
  }
  if (order.empty()) throw Error(ErrorKind::BadSpec, "empty priority order");
  return order;
}

TauRule parse_tau(const std::string& text) {
  if (text == "klogk") return TauRule::k_log_k();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (!(v > 0.0)) throw std::invalid_argument(text);
    if (used == text.size()) return TauRule::fixed(v);
    if (text.substr(used) == "k") return TauRule::multiple(v);
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::BadSpec, "bad threshold '" + text + "' (want klogk, <m>k or <t>)");
}

std::string join_order(const std::vector<int>& order) {
  std::string s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(order[i] + 1);
  }
  return s;
}

void check_permutation(const std::vector<int>& order, int num_classes) {
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(static_cast<std::size_t>(num_classes));
  std::iota(expect.begin(), expect.end(), 0);
  if (sorted != expect) {
    throw Error(ErrorKind::BadSpec, "priority order is not a permutation of " +
                                        std::to_string(num_classes) + " classes");
  }
}

std::vector<int> sorted_indices(const SystemConfig& config, auto less) {
  std::vector<int> idx(config.classes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return less(config.classes[static_cast<std::size_t>(a)], config.classes[static_cast<std::size_t>(b)]);
  });
  return idx;
}

std::vector<int> lpf_order(const SystemConfig& config) {
  return sorted_indices(config, [](const ResolvedClass& a, const ResolvedClass& b) { return a.c < b.c; });
}

// Ascending expected remaining size 1/mu, i.e. descending mu.
std::vector<int> serpt_order(const SystemConfig& config) {
  return sorted_indices(config, [](const ResolvedClass& a, const ResolvedClass& b) { return a.mu > b.mu; });
}

}  // namespace

PolicySpec parse_policy(const std::string& text) {
  if (text == "lpf") return Lpf{};
  if (text == "serpt") return Serpt{};
  if (text == "cmu") return SingleFast{SingleFast::Order::CMu, {}};
  if (text == "lpf1") return SingleFast{SingleFast::Order::Lpf1, {}};
  if (text == "thresh") return Thresh{TauRule::k_log_k()};
  if (text.rfind("thresh:", 0) == 0) {
    const std::string arg = text.substr(7);
    if (arg.rfind("tau=", 0) != 0) throw Error(ErrorKind::BadSpec, "expected thresh:tau=...");
    return Thresh{parse_tau(arg.substr(4))};
  }
  if (text.rfind("prio:", 0) == 0) return FixedPriority{parse_order(text.substr(5))};
  if (text.rfind("sf:", 0) == 0) {
    return SingleFast{SingleFast::Order::Explicit, parse_order(text.substr(3))};
  }
  throw Error(ErrorKind::BadSpec, "unknown policy '" + text + "'");
}

std::string policy_name(const PolicySpec& policy) {
  struct Namer {
    std::string operator()(const Lpf&) const { return "lpf"; }
    std::string operator()(const Serpt&) const { return "serpt"; }
    std::string operator()(const Thresh& t) const {
      switch (t.tau.kind) {
        case TauRule::Kind::KLogK: return "thresh";
        case TauRule::Kind::Multiple: {
          std::ostringstream os;
          os << "thresh:tau=" << t.tau.value << "k";
          return os.str();
        }
        case TauRule::Kind::Fixed: {
          std::ostringstream os;
          os << "thresh:tau=" << t.tau.value;
          return os.str();
        }
      }
      return "thresh";
    }
    std::string operator()(const FixedPriority& f) const { return "prio:" + join_order(f.order); }
    std::string operator()(const SingleFast& s) const {
      switch (s.order) {
        case SingleFast::Order::CMu: return "cmu";
        case SingleFast::Order::Lpf1: return "lpf1";
        case SingleFast::Order::Explicit: return "sf:" + join_order(s.explicit_order);
      }
      return "sf";
    }
  };
  return std::visit(Namer{}, policy);
}

std::vector<int> priority_order(const PolicySpec& policy, const SystemConfig& config) {
  const int n = config.num_classes();
  if (std::holds_alternative<Lpf>(policy)) return lpf_order(config);
  if (std::holds_alternative<Serpt>(policy)) return serpt_order(config);
  if (std::holds_alternative<Thresh>(policy)) {
    throw Error(ErrorKind::NotAPriorityPolicy, "THRESH order depends on the state");
  }
  if (const auto* f = std::get_if<FixedPriority>(&policy)) {
    check_permutation(f->order, n);
    return f->order;
  }
  const auto& s = std::get<SingleFast>(policy);
  switch (s.order) {
    case SingleFast::Order::CMu: return serpt_order(config);
    case SingleFast::Order::Lpf1: return lpf_order(config);
    case SingleFast::Order::Explicit: check_permutation(s.explicit_order, n); return s.explicit_order;
  }
  return lpf_order(config);
}

void greedy_fill(std::span<const int> order, std::span<const std::int64_t> n,
                 std::span<const int> c, std::int64_t k, std::span<std::int64_t> out) {
  std::int64_t budget = k;
  for (const int i : order) {
    const std::int64_t want = n[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
    const std::int64_t got = std::min(want, budget);
    out[static_cast<std::size_t>(i)] = got;
    budget -= got;
  }
}

Allocator::Allocator(const PolicySpec& policy, const SystemConfig& config) : k_(config.k) {
  if (is_single_fast(policy)) {
    throw Error(ErrorKind::BadSpec, "single-fast-server policies have no k-server allocation");
  }
  c_.reserve(config.classes.size());
  for (const auto& cl : config.classes) c_.push_back(cl.c);
  if (const auto* t = std::get_if<Thresh>(&policy)) {
    thresh_ = true;
    tau_ = t->tau.eval(config.k);
    order_ = lpf_order(config);
    alt_order_ = serpt_order(config);
  } else {
    order_ = priority_order(policy, config);
  }
}

Allocation allocate(const PolicySpec& policy, const StateCounts& state, const SystemConfig& config) {
  if (state.size() != config.classes.size()) {
    throw Error(ErrorKind::DimensionMismatch, "state has " + std::to_string(state.size()) +
                                                  " classes, config has " +
                                                  std::to_string(config.classes.size()));
  }
  for (const auto v : state) {
    if (v < 0) throw Error(ErrorKind::BadSpec, "negative job count");
  }
  const Allocator alloc(policy, config);
  Allocation out(state.size(), 0);
  const std::int64_t total = std::accumulate(state.begin(), state.end(), std::int64_t{0});
  alloc(state, total, out);
  return out;
}

FastServe single_fast_rate(const SingleFast& policy, const StateCounts& state,
                           const SystemConfig& config) {
  if (state.size() != config.classes.size()) {
    throw Error(ErrorKind::DimensionMismatch, "state/config class count mismatch");
  }
  for (const int i : priority_order(policy, config)) {
    if (state[static_cast<std::size_t>(i)] > 0) {
      return {i, static_cast<double>(config.k) * config.classes[static_cast<std::size_t>(i)].mu};
    }
  }
  return {};
}

}  // namespace malsched
