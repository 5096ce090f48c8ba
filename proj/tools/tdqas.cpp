#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tdqas/config.hpp"
#include "tdqas/runner.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> noise;
  std::optional<std::string> out;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "override the run seed");
  cmd->add_option("--noise", flags.noise, "override noise: on/off/true/false");
  cmd->add_option("--out", flags.out, "override the output path");
}

tdqas::RunConfig load_config(const std::string& path, const CommonFlags& flags) {
  tdqas::IniFile ini = tdqas::IniFile::load(path);
  if (flags.seed) ini.set("run", "seed", std::to_string(*flags.seed));
  if (flags.noise) ini.set("noise", "enabled", *flags.noise);
  if (flags.out) ini.set("run", "out", *flags.out);
  tdqas::RunConfig cfg = tdqas::RunConfig::from_ini(ini);
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << text;
  if (!f) throw std::runtime_error("failed writing output file: " + path);
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  auto dot = path.rfind('.');
  auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

int cmd_run(const std::string& config_path, const CommonFlags& flags) {
  tdqas::RunConfig cfg;
  try {
    cfg = load_config(config_path, flags);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    nlohmann::json report = tdqas::run(cfg);
    std::string text = report.dump(2) + "\n";
    if (cfg.out.empty()) {
      std::cout << text;
    } else {
      write_text(cfg.out, text);
      std::cout << "task=" << report["task"].get<std::string>()
                << " engine=" << report["engine"].get<std::string>()
                << " mode=" << report["mode"].get<std::string>()
                << " metric=" << report["metric"].get<double>() << " wrote " << cfg.out << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_hypothesis(const std::string& config_path, const CommonFlags& flags) {
  tdqas::RunConfig cfg;
  tdqas::Objective obj;
  try {
    cfg = load_config(config_path, flags);
    cfg.hypothesis.validate();
    obj = tdqas::build_objective(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    tdqas::CostLedger ledger;
    tdqas::HypothesisResult res = tdqas::hypothesis_experiment(cfg.hypothesis, obj, ledger);

    std::ostringstream samples, bins;
    tdqas::write_hypothesis_csv(samples, res.records);
    tdqas::write_bin_csv(bins, res.bins);
    std::string out = cfg.out.empty() ? "hypothesis.csv" : cfg.out;
    write_text(out, samples.str());
    write_text(with_suffix(out, "_bins"), bins.str());

    tdqas::QuintileSummary q = tdqas::quintile_trend(res.records);
    std::cout << "records=" << res.records.size() << " excluded_from_bins=" << res.n_excluded
              << " bottom_quintile_mean_d=" << q.bottom_mean_d
              << " top_quintile_mean_d=" << q.top_mean_d
              << " qcc=" << ledger.total(tdqas::PhaseTag::Experiment) << "\n"
              << "wrote " << out << " and " << with_suffix(out, "_bins") << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "hypothesis experiment failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_correlation(const std::string& config_path, const CommonFlags& flags) {
  tdqas::RunConfig cfg;
  tdqas::Objective obj;
  try {
    cfg = load_config(config_path, flags);
    cfg.correlation.validate();
    obj = tdqas::build_objective(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    tdqas::CostLedger ledger;
    tdqas::CorrelationResult res = tdqas::correlation_experiment(cfg.correlation, obj, ledger);

    std::string out = cfg.out.empty() ? "correlation.csv" : cfg.out;
    for (const auto& series : res.series) {
      std::string path = out;
      if (res.series.size() > 1) {
        std::string tag = std::string("_") + tdqas::kind_name(series.gates.single_gate) +
                          tdqas::kind_name(series.gates.double_gate);
        path = with_suffix(out, tag);
      }
      std::ostringstream csv;
      tdqas::write_correlation_csv(csv, series.records);
      write_text(path, csv.str());
      std::cout << "series " << tdqas::kind_name(series.gates.single_gate) << ":"
                << tdqas::kind_name(series.gates.double_gate) << " pearson_r=" << series.pearson_r
                << " wrote " << path << "\n";
    }
    std::cout << "qcc=" << ledger.total(tdqas::PhaseTag::Experiment) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "correlation experiment failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_report(const std::vector<std::string>& paths, const CommonFlags& flags) {
  try {
    std::vector<nlohmann::json> reports;
    for (const auto& p : paths) {
      std::ifstream f(p);
      if (!f) throw std::runtime_error("cannot open report: " + p);
      reports.push_back(nlohmann::json::parse(f));
    }
    std::string csv = tdqas::report_summary_csv(reports);
    if (flags.out) {
      write_text(*flags.out, csv);
      std::cout << "wrote " << *flags.out << "\n";
    } else {
      std::cout << csv;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "report failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topology-decoupled quantum architecture search laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> report_paths;
  CommonFlags flags;

  CLI::App* run = app.add_subcommand("run", "execute a search run from a config file");
  run->add_option("config", config_path, "config file")->required();
  add_common_flags(run, flags);

  CLI::App* hyp = app.add_subcommand("hypothesis", "gate-mutation sensitivity experiment");
  hyp->add_option("config", config_path, "config file")->required();
  add_common_flags(hyp, flags);

  CLI::App* cor = app.add_subcommand("correlation", "topology instantiation correlation experiment");
  cor->add_option("config", config_path, "config file")->required();
  add_common_flags(cor, flags);

  CLI::App* rep = app.add_subcommand("report", "summarize report JSON files as CSV");
  rep->add_option("paths", report_paths, "report JSON files")->required();
  rep->add_option("--out", flags.out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  if (run->parsed()) return cmd_run(config_path, flags);
  if (hyp->parsed()) return cmd_hypothesis(config_path, flags);
  if (cor->parsed()) return cmd_correlation(config_path, flags);
  if (rep->parsed()) return cmd_report(report_paths, flags);
  return kExitConfig;
}
