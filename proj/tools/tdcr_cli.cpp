#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "tdcr/control_loop.hpp"
#include "tdcr/ident.hpp"
#include "tdcr/perception.hpp"
#include "tdcr/report.hpp"
#include "tdcr/sizeest.hpp"

namespace fs = std::filesystem;
using namespace tdcr;

namespace {

constexpr const char* kVersion = "tdcr 1.0.0";

std::string out_root() {
  const char* env = std::getenv("TDCR_OUT_ROOT");
  return env ? env : ".";
}

fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  if (p.is_relative()) p = fs::path(out_root()) / p;
  fs::create_directories(p);
  return p;
}

void write_manifest(const fs::path& dir, const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "# " << kVersion << "\n" << cfg.serialize();
  write_file((dir / "manifest.txt").string(), os.str());
}

ScenarioConfig load_config_file(const std::string& path) {
  return load_config(read_file(path));
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Tendon-driven continuum robot simulator and analysis tools"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, out = "run", log_path, ref_path, kind_name;
  std::string data_dir, model_dir, sample_path, links_csv = "2,8,14,20,23";
  std::string column = "i_obs_dstar_filt_0";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int starts = 8, budget = 2000;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Verbose progress output");

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Seed override")
        ->each([&](const std::string&) { seed_set = true; });
  };

  auto* sim = app.add_subcommand("simulate", "Run a scenario and log it");
  sim->add_option("--config", config_path, "Scenario config file")->required();
  sim->add_option("--out", out, "Output directory");
  add_seed(sim);

  auto* ident = app.add_subcommand("identify", "Fit drive-train parameters");
  ident->add_option("--ref", ref_path, "Reference trace CSV")->required();
  ident->add_option("--config", config_path, "Excitation scenario config");
  ident->add_option("--out", out, "Output directory");
  ident->add_option("--starts", starts, "Multistart count");
  ident->add_option("--budget", budget, "Objective evaluation budget");
  add_seed(ident);

  auto* det = app.add_subcommand("detect", "Run the contact detector on a log");
  det->add_option("--log", log_path, "TimeSeriesLog CSV")->required();
  det->add_option("--out", out, "Output directory");

  auto* sens = app.add_subcommand("sensitivity", "Per-link impulse shifts");
  sens->add_option("--config", config_path, "Impulse scenario config");
  sens->add_option("--links", links_csv, "Comma-separated link indices");
  sens->add_option("--out", out, "Output directory");
  add_seed(sens);

  auto* per = app.add_subcommand("period", "Apparent period of a logged trace");
  per->add_option("--log", log_path, "TimeSeriesLog CSV")->required();
  per->add_option("--column", column, "Trace column");

  auto* unc = app.add_subcommand("uncurl", "Uncurl scan with online detection");
  unc->add_option("--config", config_path, "Uncurl scenario config");
  unc->add_option("--out", out, "Output directory");
  add_seed(unc);

  auto* gen = app.add_subcommand("gen-dataset", "Simulate the wrap dataset");
  gen->add_option("--out", out, "Output directory");
  add_seed(gen);

  auto* train = app.add_subcommand("train", "Train the size-estimation model");
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--out", out, "Output directory");
  add_seed(train);

  auto* pred = app.add_subcommand("predict", "Estimate a diameter");
  pred->add_option("--model", model_dir, "Model directory or model.json")
      ->required();
  pred->add_option("--sample", sample_path, "Sample trace CSV")->required();

  auto* rep = app.add_subcommand("report", "Emit plot data from a log");
  rep->add_option("--log", log_path, "Input CSV")->required();
  rep->add_option("--kind", kind_name, "Report kind")->required();
  rep->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors share one exit code
  }

  if (sim->parsed()) {
    auto cfg = load_config_file(config_path);
    if (seed_set) cfg.seed = seed;
    const auto dir = resolve_out(out);
    const auto log = run_scenario(cfg);
    log.save_csv((dir / "log.csv").string());
    write_manifest(dir, cfg);
    if (verbose) std::cout << "rows " << log.rows() << "\n";
    std::cout << "wrote " << (dir / "log.csv").string() << "\n";
    return 0;
  }

  if (ident->parsed()) {
    IdentProblem prob;
    load_reference(ref_path, prob.t_ref, prob.i_ref);
    if (!config_path.empty())
      prob.excitations = {load_config_file(config_path)};
    else
      prob.excitations = default_excitations();
    prob.n_starts = starts;
    prob.max_evals = budget;
    prob.seed = seed;
    const auto res = identify(prob);
    const auto dir = resolve_out(out);
    write_file((dir / "ident_report.txt").string(),
               format_ident_report(prob, res));
    std::ostringstream trace;
    trace << "start,eval,best_objective\n";
    for (std::size_t s = 0; s < res.start_traces.size(); ++s)
      for (std::size_t e = 0; e < res.start_traces[s].size(); ++e)
        trace << s << ',' << e << ','
              << format_double(res.start_traces[s][e]) << '\n';
    write_file((dir / "objective_trace.csv").string(), trace.str());
    std::cout << format_ident_report(prob, res);
    return 0;
  }

  if (det->parsed()) {
    const auto log = TimeSeriesLog::load_csv(log_path);
    const auto files =
        write_report(log, ReportKind::Detection, resolve_out(out).string());
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return 0;
  }

  if (sens->parsed()) {
    auto cfg = config_path.empty()
                   ? load_config("scenario = single-contact\n")
                   : load_config_file(config_path);
    if (seed_set) cfg.seed = seed;
    std::vector<int> links;
    std::stringstream ls(links_csv);
    for (std::string tok; std::getline(ls, tok, ',');)
      links.push_back(std::stoi(tok));
    const auto shifts = sensitivity_profile(cfg, links);
    TimeSeriesLog table;
    table.columns = {"link", "shift"};
    table.data.resize(2);
    for (std::size_t k = 0; k < links.size(); ++k) {
      table.data[0].push_back(links[k]);
      table.data[1].push_back(shifts[k]);
    }
    const auto files =
        write_report(table, ReportKind::Sensitivity, resolve_out(out).string());
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return 0;
  }

  if (per->parsed()) {
    const auto log = TimeSeriesLog::load_csv(log_path);
    if (log.column_index(column) < 0)
      throw ConfigError("period: missing column " + column);
    const auto& t = log.col("t");
    if (t.size() < 2) throw ConfigError("period: log too short");
    const double p = apparent_period(log.col(column), t[1] - t[0]);
    std::cout << "apparent_period_s " << format_double(p) << "\n";
    return 0;
  }

  if (unc->parsed()) {
    auto cfg = config_path.empty() ? load_config("scenario = active-uncurl\n")
                                   : load_config_file(config_path);
    if (seed_set) cfg.seed = seed;
    const auto res = active_uncurl_scan(cfg, cfg.contact, cfg.det);
    const auto dir = resolve_out(out);
    res.log.save_csv((dir / "log.csv").string());
    write_manifest(dir, cfg);
    std::ostringstream os;
    if (res.event)
      os << "event time " << format_double(res.event->time) << " rule "
         << to_string(res.event->rule) << "\n";
    else
      os << "no event\n";
    write_file((dir / "event.txt").string(), os.str());
    std::cout << os.str();
    return 0;
  }

  if (gen->parsed()) {
    const auto ds = generate_dataset({0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07},
                                     5, seed);
    const auto dir = resolve_out(out);
    save_dataset(ds, dir.string());
    std::cout << "wrote " << ds.size() << " samples to " << dir.string()
              << "\n";
    return 0;
  }

  if (train->parsed()) {
    const auto ds = load_dataset(data_dir);
    EnsembleHyper hyper;
    const auto model = train_ensemble(ds, hyper, seed);
    const auto dir = resolve_out(out);
    write_file((dir / "model.json").string(), serialize_model(model));
    std::cout << "wrote " << (dir / "model.json").string() << "\n";
    return 0;
  }

  if (pred->parsed()) {
    fs::path mp(model_dir);
    if (fs::is_directory(mp)) mp /= "model.json";
    const auto model = deserialize_model(read_file(mp.string()));

    const auto log = TimeSeriesLog::load_csv(sample_path);
    WrapSample s;
    const auto& t = log.col("t");
    if (t.size() < 2) throw ConfigError("predict: sample too short");
    s.dt = t[1] - t[0];
    s.i = log.col(log.column_index("i_real") >= 0 ? "i_real" : "i_obs_dstar_0");
    s.dl = log.col(log.column_index("dl_obs") >= 0 ? "dl_obs" : "dl_0");
    std::cout << "D_pred_m " << format_double(predict(model, s)) << "\n";

    // true label, when the sample sits in a dataset directory
    const fs::path manifest = fs::path(sample_path).parent_path() / "manifest.csv";
    if (fs::exists(manifest)) {
      const std::string file = fs::path(sample_path).filename().string();
      std::istringstream ms(read_file(manifest.string()));
      for (std::string line; std::getline(ms, line);) {
        if (line.size() >= file.size() &&
            line.compare(line.size() - file.size(), file.size(), file) == 0) {
          std::istringstream rs(line);
          std::string id_s, dc_s;
          std::getline(rs, id_s, ',');
          std::getline(rs, dc_s, ',');
          std::cout << "D_true_m " << dc_s << "\n";
        }
      }
    }
    return 0;
  }

  if (rep->parsed()) {
    const auto log = TimeSeriesLog::load_csv(log_path);
    const auto files = write_report(log, parse_report_kind(kind_name),
                                    resolve_out(out).string());
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
