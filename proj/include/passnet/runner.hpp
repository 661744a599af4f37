#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "passnet/io.hpp"
#include "passnet/passivity.hpp"
#include "passnet/scenario.hpp"
#include "passnet/sim.hpp"

namespace passnet {

enum class RunStatus : int { Ok = 0, ConfigError = 1, Blowup = 2, IoFailure = 3 };

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool check_only = false;
  std::optional<double> dt_override;
  std::optional<double> t_end_override;
};

struct RunReport {
  std::string scenario_name;
  nlohmann::json body;  // full structured report
  RunStatus status = RunStatus::Ok;
};

namespace run_detail {

inline nlohmann::json certificate_json(const CertificateReport& c) {
  return {{"M", c.M},
          {"max_out_degree", c.max_out_deg},
          {"lambda2", c.lambda2},
          {"alpha", c.alpha},
          {"gamma", c.gamma},
          {"alpha_margin", c.alpha_margin},
          {"gamma_margin", c.gamma_margin},
          {"pass", c.pass},
          {"globally_reachable", c.globally_reachable}};
}

inline nlohmann::json audit_json(const AuditReport& a) {
  return {{"id", a.id},
          {"samples", a.residuals.size()},
          {"min_residual", a.min_residual},
          {"violations", a.violation_count},
          {"tolerance", a.tolerance}};
}

inline double param_or(const std::map<std::string, double>& params, const std::string& key,
                       double fallback) {
  const auto it = params.find(key);
  return it != params.end() ? it->second : fallback;
}

}  // namespace run_detail

/// End-to-end scenario run: assemble, certify, simulate, audit, serialize.
/// Writes <name>.trajectory.csv, <name>.report.json and <name>.svg into
/// options.out_dir. Returns a report whose status doubles as the process
/// exit code: 0 completed (whatever the verdicts), 1 configuration error,
/// 2 solver blow-up, 3 I/O failure.
inline RunReport run_scenario(const Scenario& scenario, const RunOptions& options) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();

  RunReport report;
  report.scenario_name = scenario.name;
  nlohmann::json& body = report.body;
  body["scenario"] = scenario.name;

  ScenarioIntegration integ = scenario.integration;
  if (options.dt_override) integ.dt = *options.dt_override;
  if (options.t_end_override) integ.t_end = *options.t_end_override;
  body["solver"] = {{"method", "rk4"},
                    {"dt", integ.dt},
                    {"t_end", integ.t_end},
                    {"record_stride", integ.record_stride}};

  auto finalize = [&](RunStatus status) {
    body["wall_clock_seconds"] =
        std::chrono::duration<double>(clock::now() - t_start).count();
    report.status = status;
    return report;
  };

  std::optional<NetworkSystem> net;
  try {
    net.emplace(build_network(scenario));
  } catch (const std::exception& e) {
    body["error"] = {{"stage", "assemble"}, {"message", e.what()}};
    return finalize(RunStatus::ConfigError);
  }
  const Digraph& graph = net->graph();
  body["graph"] = {{"vertices", graph.vertex_count},
                   {"edges", graph.edge_count()},
                   {"globally_reachable", net->globally_reachable()},
                   {"max_out_degree", max_out_degree(graph)},
                   {"lambda2", undirected_spectrum(graph).lambda2}};

  // Certificate (optional). Both a direct check and the split search use
  // M from the declared output maps unless the scenario overrides it.
  std::optional<CertificateReport> cert;
  std::optional<GainSplit> split;
  double M = 1.0;
  try {
    if (net->all_agents_integrator_like()) M = slope_bound_M(net->output_maps());
    if (scenario.certificate) {
      const CertificateSpec& cs = *scenario.certificate;
      M = run_detail::param_or(cs.params, "M", M);
      if (cs.search) {
        const double b = run_detail::param_or(cs.params, "b", 1.0);
        split = static_gain_feasibility(graph, M, b);
        nlohmann::json sj = {{"requested", true}, {"b", b}, {"feasible", split.has_value()}};
        if (split) {
          sj["a"] = split->a;
          sj["reading"] = to_string(split->reading);
          sj["alpha"] = split->alpha;
          sj["gamma"] = split->gamma;
          sj["min_margin"] = split->min_margin;
          cert = agreement_certificate(graph, M, split->alpha, split->gamma);
        } else {
          // No feasible split: evaluate the certificate at (0, 0), which
          // fails with the bare structural margins.
          cert = agreement_certificate(graph, M, 0.0, 0.0);
        }
        body["certificate_search"] = sj;
      } else {
        const double alpha = run_detail::param_or(cs.params, "alpha", 0.0);
        const double gamma = run_detail::param_or(cs.params, "gamma", 0.0);
        cert = agreement_certificate(graph, M, alpha, gamma);
      }
    }
  } catch (const std::exception& e) {
    body["error"] = {{"stage", "certificate"}, {"message", e.what()}};
    return finalize(RunStatus::ConfigError);
  }
  body["certificate"] = cert ? run_detail::certificate_json(*cert) : nlohmann::json();

  if (options.check_only) {
    body["check_only"] = true;
    try {
      std::filesystem::create_directories(options.out_dir);
      std::ofstream out(options.out_dir / (scenario.name + ".report.json"));
      if (!out) throw IoError("cannot write report");
      out << body.dump(2) << '\n';
    } catch (const std::exception& e) {
      body["error"] = {{"stage", "io"}, {"message", e.what()}};
      return finalize(RunStatus::IoFailure);
    }
    return finalize(RunStatus::Ok);
  }

  // Simulation.
  IntegrationConfig cfg{integ.dt, integ.t_end, integ.record_stride};
  std::optional<Trajectory> traj;
  try {
    traj = integrate(*net, scenario.x0, cfg);
  } catch (const BlowupError& e) {
    body["error"] = {{"stage", "simulate"}, {"message", e.what()}, {"blowup_time", e.time()}};
    return finalize(RunStatus::Blowup);
  } catch (const std::exception& e) {
    body["error"] = {{"stage", "simulate"}, {"message", e.what()}};
    return finalize(RunStatus::ConfigError);
  }

  const auto agreement = detect_agreement(*traj);
  if (agreement) {
    body["agreement"] = {{"detected", true}, {"value", *agreement}};
  } else {
    body["agreement"] = {{"detected", false}};
  }

  // Audits.
  try {
    const double lambda2 = undirected_spectrum(graph).lambda2;
    ConstrainedStorage storage = net->all_agents_integrator_like()
                                     ? ConstrainedStorage::from_output_maps(net->output_maps())
                                     : ConstrainedStorage::identity(graph.vertex_count);
    nlohmann::json audits = nlohmann::json::array();
    for (const AuditSpec& spec : scenario.audits) {
      const double tol = run_detail::param_or(spec.params, "tol", 1e-6);
      AuditReport rep;
      if (spec.id == "agent_relation") {
        rep = audit_agent_relation(*traj, storage, run_detail::param_or(spec.params, "M", M),
                                   tol);
      } else if (spec.id == "controller_relation") {
        // Defaults come from the raw supply split (the ||zeta||^2 share
        // plays gamma, the ||mu||^2 share plays alpha, whichever role
        // reading satisfied the certificate), else from declared indices.
        PassivityIndices cagg{0.0, 0.0};
        std::vector<PassivityIndices> declared;
        for (const auto& ctrl : net->controllers())
          if (ctrl.indices) declared.push_back(*ctrl.indices);
        if (!declared.empty()) cagg = aggregate_indices(declared);
        double gamma = run_detail::param_or(spec.params, "gamma",
                                            split ? split->zeta_coeff : cagg.input);
        double alpha = run_detail::param_or(spec.params, "alpha",
                                            split ? split->mu_coeff : cagg.output);
        const auto bound = run_detail::param_or(spec.params, "use_lambda_max", 0.0) != 0.0
                               ? LaplacianBound::Largest
                               : LaplacianBound::SecondSmallest;
        rep = audit_controller_relation(*traj, graph, gamma, alpha, {}, tol, bound);
      } else if (spec.id == "compensation") {
        double gamma = split ? split->gamma : (cert ? cert->gamma : 0.0);
        const double eps_default = std::max(1e-6, gamma * lambda2 - M / 2.0);
        const double eps = run_detail::param_or(spec.params, "epsilon", eps_default);
        rep = audit_compensation(*traj, storage, {}, eps, tol);
      } else if (spec.id == "iop_agent") {
        PassivityIndices agg{0.0, 0.0};
        std::vector<PassivityIndices> declared;
        for (const auto& a : net->agents())
          if (a.indices) declared.push_back(*a.indices);
        if (!declared.empty()) agg = aggregate_indices(declared);
        const double delta = run_detail::param_or(spec.params, "delta", agg.input);
        const double eps = run_detail::param_or(spec.params, "epsilon", agg.output);
        rep = audit_iop_agent_relation(*traj, agent_storage_series(*net, *traj), delta, eps,
                                       tol);
      }
      audits.push_back(run_detail::audit_json(rep));
    }
    body["audits"] = audits;
  } catch (const std::exception& e) {
    body["error"] = {{"stage", "audit"}, {"message", e.what()}};
    return finalize(RunStatus::ConfigError);
  }

  // Artifacts.
  try {
    std::filesystem::create_directories(options.out_dir);
    const auto csv = options.out_dir / (scenario.name + ".trajectory.csv");
    const auto svg = options.out_dir / (scenario.name + ".svg");
    const auto rep = options.out_dir / (scenario.name + ".report.json");
    emit_trajectory_csv(*traj, csv);
    emit_plot_svg(*traj, svg, scenario.name);
    // Filenames only: the report stays byte-stable across output
    // directories.
    body["artifacts"] = {{"trajectory", csv.filename().string()},
                         {"plot", svg.filename().string()},
                         {"report", rep.filename().string()}};
    body["wall_clock_seconds"] = std::chrono::duration<double>(clock::now() - t_start).count();
    std::ofstream out(rep);
    if (!out) throw IoError("cannot write " + rep.string());
    out << body.dump(2) << '\n';
    if (!out) throw IoError("write failure on " + rep.string());
  } catch (const std::exception& e) {
    body["error"] = {{"stage", "io"}, {"message", e.what()}};
    return finalize(RunStatus::IoFailure);
  }

  report.status = RunStatus::Ok;
  return report;
}

}  // namespace passnet
