#pragma once

// Run reports and their CSV form. Column order is fixed:
//   k,policy,rho,alpha,class,mean_T,ci_T,mean_N,ci_N,bound_service,bound_cmu,tail_prob
// `class` is the 1-based position in the resolved (c-sorted) class list, `all`
// for the aggregate row, or `error` for a failed point. Empty cells mean "not
// applicable".

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "malsched/simulation.hpp"
#include "malsched/workload.hpp"

namespace malsched {

inline constexpr const char* kReportHeader =
    "k,policy,rho,alpha,class,mean_T,ci_T,mean_N,ci_N,bound_service,bound_cmu,tail_prob";

struct ReportRow {
  int k = 0;
  std::string policy;
  double rho = 0.0;
  double alpha = 0.0;
  std::string cls;
  std::optional<double> mean_t;
  std::optional<double> ci_t;
  std::optional<double> mean_n;
  std::optional<double> ci_n;
  std::optional<double> bound_service;
  std::optional<double> bound_cmu;
  std::optional<double> tail_prob;
};

struct RunReport {
  std::vector<ReportRow> rows;

  void append(const RunReport& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }
  const ReportRow* find(const std::string& policy, const std::string& cls, int k) const;
};

void write_csv(const RunReport& report, std::ostream& os);

/// Formats a number the way every CSV cell is written (17 significant digits).
std::string format_number(double v);

/// Per-class rows plus the aggregate row for one simulated point. Bound columns
/// are filled from the config; bound_cmu only when every class is exponential.
RunReport report_from_estimate(const SystemConfig& config, const std::string& policy, const Estimate& est);

ReportRow error_row(int k, const std::string& policy, double rho, double alpha);

}  // namespace malsched
