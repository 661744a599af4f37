// Acceptance suite: end-to-end checks with pinned tolerances, one printed
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "passnet/io.hpp"
#include "passnet/passivity.hpp"
#include "passnet/runner.hpp"
#include "passnet/scenario.hpp"
#include "passnet/sim.hpp"
#include "support/oracles.hpp"

using namespace passnet;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome& outcome;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      outcome.pass = false;
      if (!outcome.detail.empty()) outcome.detail += "; ";
      outcome.detail += what;
    }
  }
};

const Digraph kStrong(5, {{1, 2}, {2, 3}, {4, 3}, {5, 4}, {2, 5}, {3, 1}, {4, 1}, {5, 1}});
const Digraph kWeak(5, {{3, 2}, {2, 1}, {5, 4}, {4, 1}});

NetworkSystem integrator_network(const Digraph& g, double b = 1.0) {
  std::vector<AgentModel> agents(static_cast<std::size_t>(g.vertex_count),
                                 builtin_agent("integrator"));
  std::vector<ControllerModel> controllers(g.edge_count(), static_gain(b));
  return assemble(std::move(agents), std::move(controllers), g);
}

NetworkSystem hetero_network(const Digraph& g) {
  std::vector<AgentModel> agents;
  for (const char* k : {"integrator", "integrator", "integrator_tanh", "integrator_tanh",
                        "integrator_saturation"})
    agents.push_back(builtin_agent(k));
  std::vector<ControllerModel> controllers(g.edge_count(), static_gain(2.0));
  return assemble(std::move(agents), std::move(controllers), g);
}

Trajectory hetero_trajectory(int stride) {
  return integrate(hetero_network(kStrong), {0.23, -0.2, 1.0, -2.4, 0.0}, {1e-3, 20.0, stride});
}

Outcome spectral_regression() {
  Outcome out;
  Check c{out};
  const auto strong = undirected_spectrum(kStrong);
  c.require(std::abs(strong.lambda2 - 3.0) < 1e-6, "strong-graph lambda2 != 3");
  c.require(max_out_degree(kStrong) == 2, "strong-graph max out-degree != 2");
  const auto weak = undirected_spectrum(kWeak);
  c.require(std::abs(weak.lambda2 - 0.382) < 1e-3, "weak-graph lambda2 != 0.382");
  c.require(max_out_degree(kWeak) == 1, "weak-graph max out-degree != 1");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "lambda2 = %.7f / %.4f", strong.lambda2, weak.lambda2);
  if (out.pass) out.detail = buf;
  return out;
}

Outcome heterogeneous_case() {
  Outcome out;
  Check c{out};
  const Trajectory traj = hetero_trajectory(10);
  const auto value = detect_agreement(traj);
  c.require(value.has_value(), "agreement not detected");
  if (value) {
    c.require(std::abs(*value - 0.1776) < 5e-3, "agreement value off 0.1776");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "agreement = %.6f", *value);
    if (out.pass) out.detail = buf;
  }
  return out;
}

Outcome negative_example() {
  Outcome out;
  Check c{out};
  const Trajectory traj =
      integrate(hetero_network(kWeak), {0.23, -0.2, 1.0, -2.4, 0.0}, {1e-3, 20.0, 10});
  const auto value = detect_agreement(traj);
  c.require(value.has_value(), "agreement not detected");
  if (value) c.require(std::abs(*value - 0.23) < 5e-3, "agreement value off 0.23");

  bool any_feasible = false;
  for (double b = 0.05; b <= 8.0; b += 0.05) {
    if (static_gain_feasibility(kWeak, 1.0, b, GainReading::AlphaOnMu)) any_feasible = true;
    if (static_gain_feasibility(kWeak, 1.0, b, GainReading::AlphaOnZeta)) any_feasible = true;
  }
  c.require(!any_feasible, "a gain split was unexpectedly feasible");
  if (out.pass && value) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "agreement = %.6f, no feasible split", *value);
    out.detail = buf;
  }
  return out;
}

Outcome linear_consensus_oracle() {
  Outcome out;
  Check c{out};
  std::mt19937 rng(160214);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  double worst = 0.0;

  for (int trial = 0; trial < 20; ++trial) {
    const bool balanced = trial % 3 == 0;
    Digraph g = balanced ? (trial % 2 == 0 ? oracles::ring_digraph(3 + (trial / 3) % 4)
                                           : oracles::double_ring_digraph(3 + (trial / 3) % 4))
                         : oracles::random_reachable_digraph(rng, 3 + (trial * 7) % 8,
                                                             static_cast<int>(rng() % 6));
    if (!has_globally_reachable_node(g)) {
      c.require(false, "generator produced unreachable graph");
      continue;
    }
    const NetworkSystem net = integrator_network(g);
    Vec x0(static_cast<std::size_t>(g.vertex_count));
    for (double& v : x0) v = dist(rng);

    const Trajectory traj = integrate(net, x0, {1e-3, 10.0, 10});
    const Matrix L_o = laplacians(g).L_o;
    for (double t : {1.0, 5.0, 10.0}) {
      const auto idx = static_cast<std::size_t>(std::llround(t / traj.sample_dt));
      const Vec ref = oracles::expm_apply(oracles::scaled(L_o, -t), x0);
      for (std::size_t i = 0; i < x0.size(); ++i) {
        worst = std::max(worst, std::abs(traj.states[idx][i] - ref[i]));
        c.require(std::abs(traj.states[idx][i] - ref[i]) < 1e-6,
                  "state deviates from matrix exponential");
      }
    }

    if (balanced) {
      const Trajectory longer = integrate(net, x0, {1e-3, 40.0, 10});
      const auto value = detect_agreement(longer);
      c.require(value.has_value(), "balanced graph did not settle");
      if (value) c.require(std::abs(*value - mean(x0)) < 1e-6, "balanced agreement != mean(x0)");
    }
  }
  if (out.pass) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max |sim - expm| = %.2e", worst);
    out.detail = buf;
  }
  return out;
}

Outcome dissipation_audits() {
  Outcome out;
  Check c{out};
  const Trajectory coarse = hetero_trajectory(10);
  const Trajectory fine = hetero_trajectory(5);
  const ConstrainedStorage cs =
      ConstrainedStorage::from_output_maps(hetero_network(kStrong).output_maps());

  // Tolerance max(1e-6, C dt^2) with C estimated by step halving of the
  // sampled finite-difference step.
  const double d1 = coarse.sample_dt, d2 = fine.sample_dt;
  auto tol_from = [&](double r1, double r2) {
    const double C = std::abs(r1 - r2) / (d1 * d1 - d2 * d2);
    return std::max(1e-6, C * d1 * d1);
  };

  const AuditReport agent1 = audit_agent_relation(coarse, cs, 1.0, 1e-6);
  const AuditReport agent2 = audit_agent_relation(fine, cs, 1.0, 1e-6);
  const double agent_tol = tol_from(agent1.min_residual, agent2.min_residual);
  c.require(audit_agent_relation(coarse, cs, 1.0, agent_tol).violation_count == 0,
            "agent relation audit has violations");

  // Exact case-study split for b = 2: gamma = ab = 1, alpha = (1-a)/b = 1/4.
  const AuditReport ctrl1 = audit_controller_relation(coarse, kStrong, 1.0, 0.25, {}, 1e-6);
  const AuditReport ctrl2 = audit_controller_relation(fine, kStrong, 1.0, 0.25, {}, 1e-6);
  const double ctrl_tol = tol_from(ctrl1.min_residual, ctrl2.min_residual);
  c.require(
      audit_controller_relation(coarse, kStrong, 1.0, 0.25, {}, ctrl_tol).violation_count == 0,
      "controller relation audit has violations");

  // Linear protocol: the pre-slope residual u . proj(y) - dQ/dt is pure
  // finite-difference error, contracting ~4x when the step halves.
  const Digraph cycle(3, {{1, 2}, {2, 3}, {3, 1}});
  const NetworkSystem lin = integrator_network(cycle);
  auto pre_slope = [&](int stride) {
    const Trajectory traj = integrate(lin, {1.0, 2.0, 3.0}, {1e-3, 5.0, stride});
    const auto qdot =
        finite_difference_derivative(constrained_storage_series(traj), traj.sample_dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const Vec proj = Projector(3).apply(traj.frames[i].y);
      worst = std::max(worst, std::abs(dot(traj.frames[i].u, proj) - qdot[i]));
    }
    return worst;
  };
  const double e1 = pre_slope(10);
  const double e2 = pre_slope(5);
  c.require(e1 < 1e-2, "pre-slope residual too large");
  c.require(e2 < 0.35 * e1 + 1e-12, "pre-slope residual not second order");

  if (out.pass) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "min residuals %.2e / %.2e, pre-slope %.2e -> %.2e",
                  agent1.min_residual, ctrl1.min_residual, e1, e2);
    out.detail = buf;
  }
  return out;
}

Outcome property_suites() {
  Outcome out;
  Check c{out};

  // Projector: symmetric idempotent with 1 in the kernel, n in [2, 200].
  for (int n = 2; n <= 200; ++n) {
    const Matrix P = Projector(n).matrix();
    const Matrix PP = P * P;
    double idem = 0.0, sym = 0.0, kern = 0.0;
    for (std::size_t i = 0; i < P.rows(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < P.cols(); ++j) {
        idem = std::max(idem, std::abs(PP(i, j) - P(i, j)));
        sym = std::max(sym, std::abs(P(i, j) - P(j, i)));
        row += P(i, j);
      }
      kern = std::max(kern, std::abs(row));
    }
    c.require(idem < 1e-12 && sym < 1e-12 && kern < 1e-12, "projector property failed");
  }

  // Constrained storage definiteness on 10^4 states (half of them exact
  // consensus-output states).
  const ConstrainedStorage cs =
      ConstrainedStorage::from_output_maps(hetero_network(kStrong).output_maps());
  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> dist(-4.0, 4.0);
  std::uniform_real_distribution<double> level(-0.9, 0.9);
  for (int trial = 0; trial < 10000; ++trial) {
    Vec x(5);
    if (trial % 2 == 0) {
      for (double& v : x) v = dist(rng);
    } else {
      const double y = level(rng);
      x = {y, y, std::atanh(y), std::atanh(y), y / (1.0 - std::abs(y))};
    }
    const double q = cs.value(x);
    c.require(q >= 0.0, "storage went negative");
    Vec h(5);
    for (std::size_t i = 0; i < 5; ++i) h[i] = cs.maps[i](x[i]);
    const bool on_manifold = norm2(Projector(5).apply(h)) <= 1e-6 * norm2(h) + 1e-12;
    c.require((q <= 1e-12) == on_manifold, "storage zero set mismatch");
  }

  // Rayleigh bounds on 1000 random vectors per case-study graph.
  std::uniform_real_distribution<double> ydist(-10.0, 10.0);
  for (const Digraph* g : {&kStrong, &kWeak}) {
    for (int trial = 0; trial < 1000; ++trial) {
      Vec y(5);
      for (double& v : y) v = ydist(rng);
      const auto check = rayleigh_bounds_check(*g, y);
      c.require(check.lower_ok && check.upper_ok, "Rayleigh bound failed");
    }
  }

  // Incidence identities on 100 random digraphs.
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    const Digraph g = oracles::random_digraph(rng, n, 0.4);
    const auto inc = incidence_matrices(g);
    const auto lap = laplacians(g);
    c.require(((inc.B_o + inc.B_i) - inc.E).max_abs() == 0.0, "E != B_o + B_i");
    c.require((lap.L - inc.E * inc.E.transposed()).max_abs() == 0.0, "L != E E^T");
    c.require((lap.L - (lap.L_i + lap.L_o)).max_abs() == 0.0, "L != L_i + L_o");
  }
  if (out.pass) out.detail = "projector, storage, Rayleigh, incidence all hold";
  return out;
}

Outcome solver_order() {
  Outcome out;
  Check c{out};
  const NetworkSystem net = integrator_network(Digraph(2, {{1, 2}, {2, 1}}));
  auto final_error = [&](double dt) {
    const Trajectory traj = integrate(net, {1.0, -1.0}, {dt, 2.0, 1});
    return std::abs(traj.states.back()[0] - std::exp(-4.0));
  };
  const double e1 = final_error(0.08);
  const double e2 = final_error(0.04);
  c.require(e1 / e2 >= 12.0, "halving ratio below 12");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "halving ratio = %.2f", e1 / e2);
  if (out.pass) out.detail = buf;
  return out;
}

int run_cli(const std::string& scenario, const std::filesystem::path& out_dir,
            const std::filesystem::path& log) {
  std::ostringstream cmd;
  cmd << '"' << PASSNET_CLI_PATH << "\" run \"" << std::string(PASSNET_SCENARIO_DIR) << '/'
      << scenario << ".scn\" --out \"" << out_dir.string() << "\" >> \"" << log.string()
      << "\" 2>&1";
  const int raw = std::system(cmd.str().c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_round_trip() {
  Outcome out;
  Check c{out};
  const auto base = std::filesystem::temp_directory_path() / "passnet_acceptance";
  std::filesystem::remove_all(base);
  const auto dir1 = base / "run1", dir2 = base / "run2";
  std::filesystem::create_directories(dir1);
  std::filesystem::create_directories(dir2);
  const auto log = base / "cli.log";

  for (const char* name : {"smoke_2node", "case_linear", "case_hetero", "case_negative"}) {
    c.require(run_cli(name, dir1, log) == 0, std::string(name) + ": nonzero exit");
    c.require(run_cli(name, dir2, log) == 0, std::string(name) + ": nonzero exit on rerun");

    const auto csv1 = dir1 / (std::string(name) + ".trajectory.csv");
    const auto svg1 = dir1 / (std::string(name) + ".svg");
    const auto rep1 = dir1 / (std::string(name) + ".report.json");
    c.require(std::filesystem::exists(csv1), std::string(name) + ": missing CSV");
    c.require(std::filesystem::exists(svg1), std::string(name) + ": missing SVG");
    c.require(std::filesystem::exists(rep1), std::string(name) + ": missing report");
    if (!out.pass) continue;

    // Schema: header shape and row count (t_end / (dt * stride) + 1 rows).
    const CsvTable table = read_csv(csv1);
    c.require(table.columns.front() == "t" && table.columns.back() == "disagreement_norm",
              std::string(name) + ": CSV header shape");
    const auto parsed = parse_scenario(
        slurp(std::string(PASSNET_SCENARIO_DIR) + "/" + std::string(name) + ".scn"));
    c.require(parsed.ok(), std::string(name) + ": scenario reparse failed");
    if (parsed.ok()) {
      const auto& integ = parsed.scenario->integration;
      const auto expected = static_cast<std::size_t>(
          std::llround(integ.t_end / (integ.dt * integ.record_stride))) + 1;
      c.require(table.rows.size() == expected, std::string(name) + ": CSV row count");
    }

    const std::string svg = slurp(svg1);
    c.require(svg.rfind("<svg", 0) == 0 && svg.find("</svg>") != std::string::npos,
              std::string(name) + ": SVG structure");
    std::size_t polylines = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
         pos = svg.find("<polyline", pos + 1))
      ++polylines;
    c.require(polylines == static_cast<std::size_t>(parsed.scenario->vertices),
              std::string(name) + ": polyline count");

    // Determinism: artifacts byte-identical, reports identical modulo the
    // wall-clock field.
    c.require(slurp(csv1) == slurp(dir2 / (std::string(name) + ".trajectory.csv")),
              std::string(name) + ": CSV not deterministic");
    c.require(svg == slurp(dir2 / (std::string(name) + ".svg")),
              std::string(name) + ": SVG not deterministic");
    auto r1 = nlohmann::json::parse(slurp(rep1));
    auto r2 = nlohmann::json::parse(slurp(dir2 / (std::string(name) + ".report.json")));
    c.require(r1.contains("wall_clock_seconds"), std::string(name) + ": report lacks wall clock");
    r1.erase("wall_clock_seconds");
    r2.erase("wall_clock_seconds");
    c.require(r1 == r2, std::string(name) + ": report not deterministic");
  }

  // Exit codes are disjoint: 1 for a malformed file, 2 for a blow-up.
  const auto bad = base / "malformed.scn";
  std::ofstream(bad) << "name broken\n[graph]\nvertices 2\nedge 1 1\n";
  std::ostringstream bad_cmd;
  bad_cmd << '"' << PASSNET_CLI_PATH << "\" run \"" << bad.string() << "\" --out \""
          << dir1.string() << "\" >> \"" << log.string() << "\" 2>&1";
  int raw = std::system(bad_cmd.str().c_str());
  c.require(WIFEXITED(raw) && WEXITSTATUS(raw) == 1, "malformed scenario should exit 1");

  const auto unstable = base / "unstable.scn";
  std::ofstream(unstable)
      << "name unstable\n[graph]\nvertices 2\nedge 1 2\nedge 2 1\n[agents]\nall integrator\n"
         "[controllers]\nall static_gain b=-1\n[initial]\nx0 1 -1\n[integration]\ndt 0.001\n"
         "t_end 30\nrecord_stride 10\n";
  std::ostringstream blow_cmd;
  blow_cmd << '"' << PASSNET_CLI_PATH << "\" run \"" << unstable.string() << "\" --out \""
           << dir1.string() << "\" >> \"" << log.string() << "\" 2>&1";
  raw = std::system(blow_cmd.str().c_str());
  c.require(WIFEXITED(raw) && WEXITSTATUS(raw) == 2, "blow-up should exit 2");

  if (out.pass) out.detail = "4 scenarios, deterministic artifacts, exit codes 0/1/2";
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double time_limit_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "spectral regression", 1.0, spectral_regression},
      {2, "heterogeneous case reproduction", 10.0, heterogeneous_case},
      {3, "negative example (sufficiency only)", 10.0, negative_example},
      {4, "linear consensus matrix-exponential oracle", 30.0, linear_consensus_oracle},
      {5, "dissipation audits", 10.0, dissipation_audits},
      {6, "property suites", 30.0, property_suites},
      {7, "solver order check", 5.0, solver_order},
      {8, "CLI round trip", 60.0, cli_round_trip},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criterion.fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start).count();
    if (elapsed > criterion.time_limit_s) {
      out.pass = false;
      out.detail += out.detail.empty() ? "" : "; ";
      out.detail += "over time limit";
    }
    std::printf("[%s] criterion %d: %s (%.2fs) %s\n", out.pass ? "PASS" : "FAIL", criterion.id,
                criterion.name, elapsed, out.detail.c_str());
    if (!out.pass) ++failures;
  }
  if (failures == 0)
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}
