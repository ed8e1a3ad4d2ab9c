#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "helicoid/harness.hpp"

using namespace helicoid;

int main(int argc, char** argv) {
  CLI::App app{"helicoid: desk-scale experiments for tile-based multilinear operators"};
  app.require_subcommand(1);

  std::string config_path, out_path, format, report_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;

  std::vector<std::string> experiments = {"local_estimate", "loomis_whitney",
                                          "mixed_norm_scan", "maximal_suite",
                                          "sparse_suite",   "endpoint",
                                          "range_scan"};
  std::vector<CLI::App*> subs;
  for (const auto& name : experiments) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { seed = v; seed_set = true; }, "base seed override");
    sub->add_option("--threads", threads, "worker threads (default: hardware)");
    sub->add_option("--out", out_path, "output path (default: stdout)");
    sub->add_option("--format", format, "csv|json");
    subs.push_back(sub);
  }
  auto* verify = app.add_subcommand("verify", "re-derive a report from its config");
  verify->add_option("--config", config_path, "JSON config file")->required();
  verify->add_option("--report", report_path, "stored CSV report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
    if (verify->parsed()) {
      std::ifstream in(report_path);
      if (!in) {
        std::cerr << "cannot open report " << report_path << "\n";
        return 1;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      bool ok = verify_report(cfg, ss.str());
      std::cout << (ok ? "report verified" : "report MISMATCH") << "\n";
      return ok ? 0 : 2;
    }

    for (size_t i = 0; i < experiments.size(); ++i)
      if (subs[i]->parsed()) cfg.experiment = experiments[i];
    if (seed_set) cfg.base_seed = seed;
    if (threads >= 0) cfg.threads = threads;
    if (!out_path.empty()) cfg.out = out_path;
    if (!format.empty()) cfg.format = format;
    if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("format must be csv|json");

    Report rep = run_experiment(cfg);
    std::string text = cfg.format == "json" ? rep.to_json() : rep.to_csv();
    if (cfg.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(cfg.out);
      if (!out) throw std::runtime_error("cannot open output " + cfg.out);
      out << text;
    }
    for (const auto& [name, ok] : rep.verdicts)
      std::cerr << "verdict " << name << ": " << (ok ? "pass" : "FAIL") << "\n";
    return rep.pass() ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
