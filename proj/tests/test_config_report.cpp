#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "malsched/config_file.hpp"
#include "malsched/error.hpp"
#include "malsched/report.hpp"

using namespace malsched;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text, "cfg.toml");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadSpec);
    return e.what();
  }
  FAIL("expected a parse error");
  return {};
}

const char* kGood = R"(k = 4
regime = { type = "rho", rho = 0.6 }
policies = ["lpf", "thresh:tau=2k"]
engine = "event"
cap = 70

[plan]
measure_scale = 100
warmup_fraction = 0.1
replications = 3
seed = 9

[[class]]
p = 0.5
dist = { type = "hyperexp", branches = [{ prob = 0.5, rate = 0.5 }, { prob = 0.5, rate = 2.0 }] }
parallelism = { type = "const", m = 1 }

[[class]]
p = 0.5
dist = { type = "exp", rate = 2.0 }
parallelism = { type = "log2" }
)";

}  // namespace

TEST_CASE("a complete config parses") {
  const auto cf = parse_config_text(kGood, "cfg.toml");
  REQUIRE(cf.k);
  CHECK(*cf.k == 4);
  CHECK(cf.policies == std::vector<std::string>{"lpf", "thresh:tau=2k"});
  CHECK(cf.engine == EngineKind::Event);
  CHECK(cf.cap == 70);
  CHECK(cf.classes.size() == 2);
  CHECK_FALSE(cf.classes[0].size.is_exponential());
  CHECK(cf.classes[1].parallelism.kind == ParallelismRule::Kind::Log2);
  const auto cfg = resolve_config(*cf.k, cf.classes, *cf.regime);
  const auto plan = cf.plan.resolve(cfg);
  CHECK(plan.measure_time == doctest::Approx(100 / 0.4));
  CHECK(plan.warmup_time == doctest::Approx(25.0));
  CHECK(plan.replications == 3);
  CHECK(plan.base_seed == 9);
}

TEST_CASE("parse errors name the line and key") {
  CHECK(error_of("k = 4\nbogus = 1\n").find("cfg.toml:2: key 'bogus'") != std::string::npos);
  CHECK(error_of("k = \"four\"\n").find("cfg.toml:1: key 'k'") != std::string::npos);
  CHECK(error_of("k = 0\n").find("must be >= 1") != std::string::npos);
  CHECK(error_of("k = 4\n[plan]\nreplications = 0\n").find("cfg.toml:3: key 'plan.replications'") !=
        std::string::npos);
  CHECK(error_of("k = 4\n\n[[class]]\np = 1.0\ndist = { type = \"exp\", rate = 1.0 }\n")
            .find("missing key 'parallelism'") != std::string::npos);
  CHECK(error_of("[[class]]\np = 1.0\ndist = { type = \"gamma\" }\nparallelism = { type = \"full\" }\n")
            .find("cfg.toml:3") != std::string::npos);
  CHECK(error_of("[[class]]\np = 1.0\ndist = { type = \"exp\", rate = -1.0 }\nparallelism = { type = \"full\" }\n")
            .find("cfg.toml:3") != std::string::npos);
  CHECK(error_of("engine = \"gpu\"\n").find("unknown engine") != std::string::npos);
  CHECK(error_of("regime = { type = \"beta\" }\n").find("regime.type") != std::string::npos);
  CHECK(error_of("k = [1,\n").find("cfg.toml:") != std::string::npos);
  CHECK(error_of("[[class]]\np = 1.0\nweight = 2\ndist = { type = \"exp\", rate = 1.0 }\nparallelism = { type = "
                 "\"full\" }\n")
            .find("cfg.toml:3: key 'class.weight'") != std::string::npos);
}

TEST_CASE("missing files are configuration errors") {
  try {
    load_config_file("/nonexistent/cfg.toml");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadSpec);
  }
}

TEST_CASE("CSV layout") {
  const auto cfg = resolve_config(4,
                                  {{SizeDist::exponential(1.0), 0.5, ParallelismRule::constant(1)},
                                   {SizeDist::exponential(2.0), 0.5, ParallelismRule::full()}},
                                  FixedRho{0.5});
  Estimate est;
  est.classes.resize(2);
  est.classes[0].mean_n = {1.0, 0.1};
  est.classes[0].mean_t = {2.0, 0.2};
  est.classes[0].tail = MeanCi{0.25, 0.0};
  est.classes[1].mean_n = {3.0, 0.3};
  est.classes[1].mean_t = {4.0, 0.4};
  est.mean_n = {4.0, 0.5};
  est.mean_t = {3.0, 0.6};
  RunReport rep = report_from_estimate(cfg, "lpf", est);
  rep.rows.push_back(error_row(8, "serpt", 0.5, 4.0));
  std::ostringstream os;
  write_csv(rep, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == kReportHeader);
  std::getline(in, line);
  CHECK(line.rfind("4,lpf,0.5,2,1,2,0.20000000000000001,1,0.10000000000000001,", 0) == 0);
  CHECK(line.substr(line.size() - 5) == ",0.25");
  std::getline(in, line);
  CHECK(line.rfind("4,lpf,0.5,2,2,4,", 0) == 0);
  CHECK(line.back() == ',');  // no tail requested
  std::getline(in, line);
  CHECK(line.rfind("4,lpf,0.5,2,all,3,", 0) == 0);
  std::getline(in, line);
  CHECK(line == "8,serpt,0.5,4,error,,,,,,,");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(rep.find("lpf", "all", 4) != nullptr);
  CHECK(rep.find("lpf", "all", 8) == nullptr);
}
