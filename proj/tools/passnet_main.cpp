#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "passnet/runner.hpp"
#include "passnet/scenario.hpp"

namespace {

int run_command(const std::string& scenario_path, const passnet::RunOptions& options) {
  std::ifstream in(scenario_path);
  if (!in) {
    std::cerr << "error: cannot open scenario file " << scenario_path << '\n';
    return static_cast<int>(passnet::RunStatus::ConfigError);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  const passnet::ParseResult parsed = passnet::parse_scenario(buffer.str());
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) {
      std::cerr << scenario_path << ':' << d.line << ": [" << d.code << "] " << d.field << ": "
                << d.message << '\n';
    }
    return static_cast<int>(passnet::RunStatus::ConfigError);
  }

  const passnet::RunReport report = passnet::run_scenario(*parsed.scenario, options);
  const auto& body = report.body;

  if (body.contains("error")) {
    std::cerr << "error at stage " << body["error"]["stage"].get<std::string>() << ": "
              << body["error"]["message"].get<std::string>() << '\n';
  }
  if (body.contains("certificate") && body["certificate"].is_object()) {
    const auto& c = body["certificate"];
    std::cout << "certificate: " << (c["pass"].get<bool>() ? "pass" : "fail")
              << "  (alpha margin " << c["alpha_margin"].get<double>() << ", gamma margin "
              << c["gamma_margin"].get<double>() << ")\n";
  }
  if (body.contains("agreement")) {
    if (body["agreement"]["detected"].get<bool>())
      std::cout << "agreement: " << body["agreement"]["value"].get<double>() << '\n';
    else
      std::cout << "agreement: not detected\n";
  }
  if (body.contains("audits")) {
    for (const auto& a : body["audits"]) {
      std::cout << "audit " << a["id"].get<std::string>() << ": " << a["violations"].get<std::size_t>()
                << " violations, min residual " << a["min_residual"].get<double>() << '\n';
    }
  }
  if (body.contains("artifacts")) {
    std::cout << "report: "
              << (options.out_dir / body["artifacts"]["report"].get<std::string>()).string()
              << '\n';
  }
  return static_cast<int>(report.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"passnet: simulate and audit passivity-based output agreement on digraphs"};
  app.require_subcommand(1);

  std::string scenario_path;
  passnet::RunOptions options;
  std::string out_dir = ".";
  double dt = 0.0, t_end = 0.0;

  CLI::App* run = app.add_subcommand("run", "run a scenario end to end");
  run->add_option("scenario", scenario_path, "scenario file (.scn)")->required();
  run->add_option("--out", out_dir, "output directory for artifacts");
  run->add_flag("--check-only", options.check_only,
                "assemble and certify without simulating");
  run->add_option("--dt", dt, "override the integration step");
  run->add_option("--t-end", t_end, "override the integration horizon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(passnet::RunStatus::ConfigError);
  }

  options.out_dir = out_dir;
  if (run->count("--dt")) options.dt_override = dt;
  if (run->count("--t-end")) options.t_end_override = t_end;

  try {
    return run_command(scenario_path, options);
  } catch (const passnet::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return static_cast<int>(passnet::RunStatus::IoFailure);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(passnet::RunStatus::ConfigError);
  }
}
