#include "tdcr/log.hpp"

#include <fstream>
#include <sstream>

namespace tdcr {

std::vector<std::string> TimeSeriesLog::standard_columns() {
  std::vector<std::string> cols = {"t"};
  auto per_tendon = [&cols](const std::string& base) {
    cols.push_back(base + "_0");
    cols.push_back(base + "_1");
  };
  per_tendon("i_cmd");
  per_tendon("i_obs_star");
  per_tendon("i_obs_dstar");
  per_tendon("i_obs_dstar_filt");
  per_tendon("u_ff");
  per_tendon("u_fb");
  per_tendon("F_cmd");
  per_tendon("F_obs");
  per_tendon("dl");
  per_tendon("dldot");
  per_tendon("theta_out");
  cols.push_back("tip_x");
  cols.push_back("tip_y");
  cols.push_back("contact");
  return cols;
}

int TimeSeriesLog::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

const std::vector<double>& TimeSeriesLog::col(const std::string& name) const {
  const int i = column_index(name);
  if (i < 0) throw IoError("log: missing column '" + name + "'");
  return data[static_cast<std::size_t>(i)];
}

std::string TimeSeriesLog::to_csv() const {
  std::string out;
  out += "# ";
  out += kSchemaVersion;
  out += "\n";
  std::istringstream hc(header_comment);
  std::string line;
  while (std::getline(hc, line)) {
    out += "# ";
    out += line;
    out += "\n";
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ",";
    out += columns[i];
  }
  out += "\n";
  const std::size_t n = rows();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ",";
      out += format_double(data[c][r]);
    }
    out += "\n";
  }
  return out;
}

void TimeSeriesLog::save_csv(const std::string& path) const {
  write_file(path, to_csv());
}

TimeSeriesLog TimeSeriesLog::load_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  TimeSeriesLog log;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      if (body == kSchemaVersion) continue;
      log.header_comment += body;
      log.header_comment += "\n";
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      log.columns = cells;
      log.data.assign(cells.size(), {});
      have_header = true;
      continue;
    }
    if (cells.size() != log.columns.size())
      throw IoError(path + ": ragged CSV row");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        log.data[c].push_back(std::stod(cells[c]));
      } catch (const std::exception&) {
        throw IoError(path + ": malformed numeric cell '" + cells[c] + "'");
      }
    }
  }
  if (!have_header) throw IoError(path + ": empty CSV");
  return log;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << content;
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace tdcr
