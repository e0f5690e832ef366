#pragma once

#include <string>
#include <vector>

#include "tdcr/log.hpp"

namespace tdcr {

// Plot-data emission: each kind turns a log into tidy CSVs plus a summary
// text file with the derived numbers for the matching figure panel.
enum class ReportKind {
  ForceStep,   // commanded vs observed force; delay + rise summary
  ExtremeCurl, // reel speed and current traces; stall + saturation summary
  Sensitivity, // per-link shift bars (columns: link, shift)
  Period,      // filtered current trace; apparent-period summary
  Detection,   // detector markers over the filtered current
  SizeEst,     // predicted-vs-true scatter (columns: D_true, D_pred); MAE/R^2
};

ReportKind parse_report_kind(const std::string& name);
std::string to_string(ReportKind k);

// Writes the plot CSVs and summary.txt into out_dir; returns the paths
// written. Throws ConfigError naming any missing column.
std::vector<std::string> write_report(const TimeSeriesLog& log, ReportKind kind,
                                      const std::string& out_dir);

}  // namespace tdcr
