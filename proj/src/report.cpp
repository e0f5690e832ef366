#include "tdcr/report.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "tdcr/control_loop.hpp"
#include "tdcr/perception.hpp"
#include "tdcr/sizeest.hpp"

namespace tdcr {

ReportKind parse_report_kind(const std::string& name) {
  if (name == "force-step") return ReportKind::ForceStep;
  if (name == "extreme-curl") return ReportKind::ExtremeCurl;
  if (name == "sensitivity") return ReportKind::Sensitivity;
  if (name == "period") return ReportKind::Period;
  if (name == "detection") return ReportKind::Detection;
  if (name == "size-est") return ReportKind::SizeEst;
  throw ConfigError("report: unknown kind '" + name + "'");
}

std::string to_string(ReportKind k) {
  switch (k) {
    case ReportKind::ForceStep: return "force-step";
    case ReportKind::ExtremeCurl: return "extreme-curl";
    case ReportKind::Sensitivity: return "sensitivity";
    case ReportKind::Period: return "period";
    case ReportKind::Detection: return "detection";
    case ReportKind::SizeEst: return "size-est";
  }
  return "?";
}

namespace {

void require_columns(const TimeSeriesLog& log,
                     const std::vector<std::string>& names) {
  std::string missing;
  for (const auto& n : names)
    if (log.column_index(n) < 0) missing += (missing.empty() ? "" : ", ") + n;
  if (!missing.empty())
    throw ConfigError("report: missing columns: " + missing);
}

std::string emit_csv(const TimeSeriesLog& log,
                     const std::vector<std::string>& cols,
                     const std::string& path) {
  std::ostringstream os;
  for (std::size_t c = 0; c < cols.size(); ++c)
    os << (c ? "," : "") << cols[c];
  os << '\n';
  const std::size_t rows = log.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c)
      os << (c ? "," : "") << format_double(log.col(cols[c])[r]);
    os << '\n';
  }
  write_file(path, os.str());
  return path;
}

}  // namespace

std::vector<std::string> write_report(const TimeSeriesLog& log,
                                      ReportKind kind,
                                      const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;
  std::ostringstream summary;
  summary << "report " << to_string(kind) << "\n";

  switch (kind) {
    case ReportKind::ForceStep: {
      require_columns(log, {"t", "F_cmd_0", "F_obs_0"});
      written.push_back(
          emit_csv(log, {"t", "F_cmd_0", "F_obs_0"}, out_dir + "/force.csv"));
      const auto& t = log.col("t");
      const double dt = t.size() > 1 ? t[1] - t[0] : 1.0;
      const double delay = xcorr_delay(log.col("F_cmd_0"), log.col("F_obs_0"), dt);
      summary << "delay_ms " << format_double(delay * 1000.0) << "\n";
      const double settled = log.col("F_cmd_0").back();
      const double rise = rise_time_10_90(log.col("F_obs_0"), dt, settled);
      summary << "rise_ms " << format_double(rise * 1000.0) << "\n";
      break;
    }
    case ReportKind::ExtremeCurl: {
      require_columns(log, {"t", "dldot_0", "i_obs_star_0", "i_cmd_0"});
      written.push_back(emit_csv(log, {"t", "dldot_0", "i_obs_star_0"},
                                 out_dir + "/curl.csv"));
      double i_max = 0.0;
      for (double v : log.col("i_obs_star_0"))
        i_max = std::max(i_max, std::abs(v));
      summary << "dldot_final " << format_double(log.col("dldot_0").back())
              << "\n"
              << "i_abs_max " << format_double(i_max) << "\n";
      break;
    }
    case ReportKind::Sensitivity: {
      require_columns(log, {"link", "shift"});
      written.push_back(
          emit_csv(log, {"link", "shift"}, out_dir + "/sensitivity.csv"));
      const auto& link = log.col("link");
      const auto& shift = log.col("shift");
      for (std::size_t k = 0; k < link.size(); ++k)
        summary << "shift_link_" << static_cast<int>(link[k]) << ' '
                << format_double(shift[k]) << "\n";
      break;
    }
    case ReportKind::Period: {
      require_columns(log, {"t", "i_obs_dstar_filt_0"});
      written.push_back(emit_csv(log, {"t", "i_obs_dstar_filt_0"},
                                 out_dir + "/period_trace.csv"));
      const auto& t = log.col("t");
      const double dt = t.size() > 1 ? t[1] - t[0] : 1.0;
      summary << "apparent_period_s "
              << format_double(apparent_period(log.col("i_obs_dstar_filt_0"), dt))
              << "\n";
      break;
    }
    case ReportKind::Detection: {
      require_columns(log, {"t", "i_obs_dstar_filt_0"});
      const auto& t = log.col("t");
      const double dt = t.size() > 1 ? t[1] - t[0] : 1.0;
      const auto events =
          detect_contact(log.col("i_obs_dstar_filt_0"), dt, DetectorConfig{});
      std::ostringstream os;
      os << "time,value,baseline,rule\n";
      for (const auto& e : events)
        os << format_double(e.time) << ',' << format_double(e.value) << ','
           << format_double(e.baseline) << ',' << to_string(e.rule) << '\n';
      const std::string path = out_dir + "/events.csv";
      write_file(path, os.str());
      written.push_back(path);
      summary << "events " << events.size() << "\n";
      break;
    }
    case ReportKind::SizeEst: {
      require_columns(log, {"D_true", "D_pred"});
      written.push_back(
          emit_csv(log, {"D_true", "D_pred"}, out_dir + "/scatter.csv"));
      const auto m = metrics(log.col("D_true"), log.col("D_pred"));
      summary << "mae_mm " << format_double(m.mae * 1000.0) << "\n"
              << "r2 " << format_double(m.r2) << "\n";
      break;
    }
  }

  const std::string spath = out_dir + "/summary.txt";
  write_file(spath, summary.str());
  written.push_back(spath);
  return written;
}

}  // namespace tdcr
