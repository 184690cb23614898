#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "chanfid/config.hpp"
#include "chanfid/sweep.hpp"

namespace {

using namespace chanfid;

// 0 success, 1 config/usage error, 2 numerical invariant violation.
int exit_code_for(ErrorKind kind) { return kind == ErrorKind::numerical ? 2 : 1; }

void print_slope(const char* name, const SlopeFit& fit) {
  std::cout << name << ": ";
  if (fit.valid) {
    std::cout << "slope=" << format_number(fit.slope)
              << " intercept=" << format_number(fit.intercept) << " r2=" << format_number(fit.r2)
              << " points=" << fit.points_used << " excluded=" << fit.points_excluded << "\n";
  } else {
    std::cout << "unavailable (" << fit.note << ")\n";
  }
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            const std::string& format_override, int threads, bool have_seed,
            std::uint64_t seed_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (!format_override.empty())
    cfg.format = format_override == "json" ? ReportFormat::json : ReportFormat::csv;
  if (!out_override.empty()) cfg.output_path = out_override;
  if (have_seed) cfg.averaging.seed = seed_override;
  cfg.averaging.threads = threads;

  const SweepReport report = run_sweep(cfg);

  auto emit = [&](std::ostream& os) {
    if (cfg.format == ReportFormat::json)
      write_json(report, os);
    else
      write_csv(report, os);
  };
  if (cfg.output_path.empty()) {
    emit(std::cout);
  } else {
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) fail(ErrorKind::config, "cannot open output file: " + cfg.output_path);
    emit(out);
    std::cout << "wrote " << cfg.output_path << " (" << report.rows.size() << " rows)\n";
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  const ExperimentConfig cfg = load_config(config_path);
  const char* kind = "?";
  switch (cfg.channel.kind()) {
    case ParamChannel::Kind::ion_trap: kind = "ion_trap"; break;
    case ParamChannel::Kind::depolarizing: kind = "depolarizing"; break;
    case ParamChannel::Kind::unitary_generator: kind = "unitary_generator"; break;
    case ParamChannel::Kind::custom: kind = "custom"; break;
  }
  std::cout << "OK: " << kind << " channel, arity " << cfg.channel.arity() << ", "
            << cfg.sweep.size() << " sweep point(s)\n";
  return 0;
}

int cmd_slopes(const std::string& report_path) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "cannot open report file: " + report_path);
  SweepReport report;
  report.rows = read_csv_rows(in);
  refit_slopes(report);
  print_slope("residual", report.residual_slope);
  print_slope("p0_minus_p", report.p0_minus_p_slope);
  print_slope("pred_defect_p", report.pred_defect_p_slope);
  print_slope("pred_defect_f", report.pred_defect_f_slope);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Purity/fidelity sweeps for quantum channels under control-parameter errors"};
  app.require_subcommand(1);

  std::string config_path, report_path, out_path, format;
  int threads = 1;
  std::uint64_t seed_override = 0;

  CLI::App* run = app.add_subcommand("run", "run a sweep described by a config file");
  run->add_option("config", config_path, "config file path")->required();
  run->add_option("--out", out_path, "report output path (default: config output.path or stdout)");
  run->add_option("--format", format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--threads", threads, "worker threads for Monte Carlo shards")
      ->check(CLI::PositiveNumber);
  CLI::Option* seed_opt =
      run->add_option("--seed-override", seed_override, "replace the configured Monte Carlo seed");

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a config file");
  validate->add_option("config", config_path, "config file path")->required();

  CLI::App* slopes = app.add_subcommand("slopes", "re-fit slopes from an existing CSV report");
  slopes->add_option("report", report_path, "CSV report path")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed())
      return cmd_run(config_path, out_path, format, threads, seed_opt->count() > 0,
                     seed_override);
    if (validate->parsed()) return cmd_validate(config_path);
    if (slopes->parsed()) return cmd_slopes(report_path);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const chanfid::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  return 0;
}
