#pragma once

#include <string>
#include <vector>

#include "tdcr/config.hpp"

namespace tdcr {

// Uniformly sampled signal table recorded by run_scenario. Column order is
// versioned; golden-file tests pin the header.
struct TimeSeriesLog {
  static constexpr const char* kSchemaVersion = "tdcr-log-1";

  std::vector<std::string> columns;           // fixed order
  std::vector<std::vector<double>> data;      // data[col][row]
  std::string header_comment;                 // resolved config echo

  static std::vector<std::string> standard_columns();

  std::size_t rows() const { return columns.empty() ? 0 : data[0].size(); }
  int column_index(const std::string& name) const;  // -1 when absent
  const std::vector<double>& col(const std::string& name) const;

  // CSV with a '#'-prefixed header block echoing the resolved config,
  // then one header row and the fixed column order.
  std::string to_csv() const;
  void save_csv(const std::string& path) const;
  static TimeSeriesLog load_csv(const std::string& path);
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace tdcr
