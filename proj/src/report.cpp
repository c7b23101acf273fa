#include "malsched/report.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "malsched/exact.hpp"

namespace malsched {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

namespace {

void cell(std::ostream& os, const std::optional<double>& v) {
  os << ',';
  if (v) os << format_number(*v);
}

}  // namespace

const ReportRow* RunReport::find(const std::string& policy, const std::string& cls, int k) const {
  for (const auto& r : rows) {
    if (r.policy == policy && r.cls == cls && r.k == k) return &r;
  }
  return nullptr;
}

void write_csv(const RunReport& report, std::ostream& os) {
  os << kReportHeader << '\n';
  for (const auto& r : report.rows) {
    os << r.k << ',' << r.policy << ',' << format_number(r.rho) << ',' << format_number(r.alpha) << ','
       << r.cls;
    cell(os, r.mean_t);
    cell(os, r.ci_t);
    cell(os, r.mean_n);
    cell(os, r.ci_n);
    cell(os, r.bound_service);
    cell(os, r.bound_cmu);
    cell(os, r.tail_prob);
    os << '\n';
  }
}

RunReport report_from_estimate(const SystemConfig& config, const std::string& policy, const Estimate& est) {
  const auto service = lpf_service_lower_bound(config);
  std::optional<exact::PriorityQueueResult> cmu;
  if (config.all_exponential()) cmu = exact::cmu_system(config);

  RunReport rep;
  const auto base = [&](std::string cls) {
    ReportRow r;
    r.k = config.k;
    r.policy = policy;
    r.rho = config.rho;
    r.alpha = config.alpha;
    r.cls = std::move(cls);
    return r;
  };
  for (std::size_t i = 0; i < config.classes.size(); ++i) {
    const auto& ce = est.classes[i];
    ReportRow r = base(std::to_string(i + 1));
    r.mean_t = ce.mean_t.mean;
    r.ci_t = ce.mean_t.half_width;
    r.mean_n = ce.mean_n.mean;
    r.ci_n = ce.mean_n.half_width;
    r.bound_service = service.per_class[i];
    if (cmu) r.bound_cmu = cmu->mean_t[i];
    if (ce.tail) r.tail_prob = ce.tail->mean;
    rep.rows.push_back(std::move(r));
  }
  ReportRow all = base("all");
  all.mean_t = est.mean_t.mean;
  all.ci_t = est.mean_t.half_width;
  all.mean_n = est.mean_n.mean;
  all.ci_n = est.mean_n.half_width;
  all.bound_service = service.aggregate;
  if (cmu) all.bound_cmu = cmu->mean_t_aggregate;
  rep.rows.push_back(std::move(all));
  return rep;
}

ReportRow error_row(int k, const std::string& policy, double rho, double alpha) {
  ReportRow r;
  r.k = k;
  r.policy = policy;
  r.rho = rho;
  r.alpha = alpha;
  r.cls = "error";
  return r;
}

}  // namespace malsched
