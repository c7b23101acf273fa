#include "malsched/config_file.hpp"

#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

namespace malsched {

SimPlan PlanSpec::resolve(const SystemConfig& config) const {
  SimPlan p;
  if (measure_time) {
    p.measure_time = *measure_time;
  } else if (measure_scale) {
    p.measure_time = *measure_scale / (1.0 - config.rho);
  }
  p.warmup_time = warmup_time ? *warmup_time : warmup_fraction * p.measure_time;
  p.replications = replications;
  p.base_seed = seed;
  return p;
}

EngineKind parse_engine(std::string_view text) {
  if (text == "ctmc") return EngineKind::Ctmc;
  if (text == "event") return EngineKind::Event;
  throw Error(ErrorKind::BadSpec, "unknown engine '" + std::string(text) + "' (want ctmc or event)");
}

std::string_view to_string(EngineKind engine) { return engine == EngineKind::Ctmc ? "ctmc" : "event"; }

namespace {

class Reader {
 public:
  explicit Reader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const toml::node& node, std::string_view key, const std::string& msg) const {
    std::ostringstream os;
    os << source_ << ':' << node.source().begin.line << ": key '" << key << "': " << msg;
    throw Error(ErrorKind::BadSpec, os.str());
  }

  [[noreturn]] void fail_missing(const toml::table& parent, std::string_view key) const {
    std::ostringstream os;
    os << source_ << ':' << parent.source().begin.line << ": missing key '" << key << "'";
    throw Error(ErrorKind::BadSpec, os.str());
  }

  double number(const toml::node& node, std::string_view key) const {
    if (auto v = node.value<double>()) return *v;
    fail(node, key, "expected a number");
  }

  std::int64_t integer(const toml::node& node, std::string_view key) const {
    if (const auto* i = node.as_integer()) return i->get();
    fail(node, key, "expected an integer");
  }

  std::string string(const toml::node& node, std::string_view key) const {
    if (const auto* s = node.as_string()) return s->get();
    fail(node, key, "expected a string");
  }

  const toml::table& table(const toml::node& node, std::string_view key) const {
    if (const auto* t = node.as_table()) return *t;
    fail(node, key, "expected a table");
  }

  const toml::array& array(const toml::node& node, std::string_view key) const {
    if (const auto* a = node.as_array()) return *a;
    fail(node, key, "expected an array");
  }

  const toml::node& required(const toml::table& t, std::string_view key) const {
    if (const auto* n = t.get(key)) return *n;
    fail_missing(t, key);
  }

  SizeDist dist(const toml::table& t) const {
    const std::string type = string(required(t, "type"), "dist.type");
    const auto located = [&](auto make) -> SizeDist {
      try {
        return make();
      } catch (const Error& e) {
        fail(t, "dist", e.what());
      }
    };
    if (type == "exp") {
      const double rate = number(required(t, "rate"), "dist.rate");
      return located([&] { return SizeDist::exponential(rate); });
    }
    if (type == "hyperexp") {
      std::vector<HyperBranch> branches;
      for (const auto& b : array(required(t, "branches"), "dist.branches")) {
        const auto& bt = table(b, "dist.branches[]");
        branches.push_back({number(required(bt, "prob"), "prob"), number(required(bt, "rate"), "rate")});
      }
      return located([&] { return SizeDist::hyperexp(branches); });
    }
    fail(*t.get("type"), "dist.type", "unknown distribution '" + type + "'");
  }

  ParallelismRule parallelism(const toml::table& t) const {
    const std::string type = string(required(t, "type"), "parallelism.type");
    if (type == "const") {
      const auto m = integer(required(t, "m"), "parallelism.m");
      if (m < 1) fail(*t.get("m"), "parallelism.m", "must be >= 1");
      return ParallelismRule::constant(static_cast<int>(m));
    }
    if (type == "log2") return ParallelismRule::log2();
    if (type == "full") return ParallelismRule::full();
    fail(*t.get("type"), "parallelism.type", "unknown rule '" + type + "'");
  }

  ScalingRegime regime(const toml::table& t) const {
    const std::string type = string(required(t, "type"), "regime.type");
    if (type == "alpha") {
      return PowerLawAlpha{number(required(t, "a"), "regime.a"), number(required(t, "b"), "regime.b")};
    }
    if (type == "rho") return FixedRho{number(required(t, "rho"), "regime.rho")};
    fail(*t.get("type"), "regime.type", "unknown regime '" + type + "' (want alpha or rho)");
  }

 private:
  std::string source_;
};

}  // namespace

ConfigFile parse_config_text(std::string_view text, std::string_view source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source_name << ':' << e.source().begin.line << ": " << e.description();
    throw Error(ErrorKind::BadSpec, os.str());
  }

  const Reader rd(source_name);
  ConfigFile cf;
  for (const auto& [key_node, node] : root) {
    const std::string_view key = key_node.str();
    if (key == "k") {
      const auto k = rd.integer(node, key);
      if (k < 1) rd.fail(node, key, "must be >= 1");
      cf.k = static_cast<int>(k);
    } else if (key == "k_values") {
      for (const auto& v : rd.array(node, key)) {
        const auto k = rd.integer(v, key);
        if (k < 1) rd.fail(v, key, "must be >= 1");
        cf.k_values.push_back(static_cast<int>(k));
      }
    } else if (key == "rho_values") {
      for (const auto& v : rd.array(node, key)) cf.rho_values.push_back(rd.number(v, key));
    } else if (key == "regime") {
      cf.regime = rd.regime(rd.table(node, key));
    } else if (key == "policy") {
      cf.policies = {rd.string(node, key)};
    } else if (key == "policies") {
      for (const auto& v : rd.array(node, key)) cf.policies.push_back(rd.string(v, key));
    } else if (key == "engine") {
      try {
        cf.engine = parse_engine(rd.string(node, key));
      } catch (const Error& e) {
        rd.fail(node, key, e.what());
      }
    } else if (key == "cap") {
      const auto c = rd.integer(node, key);
      if (c < 1) rd.fail(node, key, "must be >= 1");
      cf.cap = static_cast<int>(c);
    } else if (key == "plan") {
      for (const auto& [pk_node, pn] : rd.table(node, key)) {
        const std::string_view pk = pk_node.str();
        const std::string full = "plan." + std::string(pk);
        if (pk == "measure_time") {
          cf.plan.measure_time = rd.number(pn, full);
        } else if (pk == "measure_scale") {
          cf.plan.measure_scale = rd.number(pn, full);
        } else if (pk == "warmup_time") {
          cf.plan.warmup_time = rd.number(pn, full);
        } else if (pk == "warmup_fraction") {
          cf.plan.warmup_fraction = rd.number(pn, full);
        } else if (pk == "replications") {
          const auto r = rd.integer(pn, full);
          if (r < 1) rd.fail(pn, full, "must be >= 1");
          cf.plan.replications = static_cast<int>(r);
        } else if (pk == "seed") {
          cf.plan.seed = static_cast<std::uint64_t>(rd.integer(pn, full));
        } else {
          rd.fail(pn, full, "unknown key");
        }
      }
    } else if (key == "class") {
      for (const auto& entry : rd.array(node, key)) {
        const auto& ct = rd.table(entry, key);
        ClassSpec cs;
        cs.p = rd.number(rd.required(ct, "p"), "class.p");
        cs.size = rd.dist(rd.table(rd.required(ct, "dist"), "class.dist"));
        cs.parallelism = rd.parallelism(rd.table(rd.required(ct, "parallelism"), "class.parallelism"));
        for (const auto& [ck, cn] : ct) {
          const std::string_view s = ck.str();
          if (s != "p" && s != "dist" && s != "parallelism") rd.fail(cn, "class." + std::string(s), "unknown key");
        }
        cf.classes.push_back(std::move(cs));
      }
    } else {
      rd.fail(node, key, "unknown key");
    }
  }
  return cf;
}

ConfigFile load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadSpec, "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

}  // namespace malsched
