// Five nonlinear integrator-like agents on a strongly connected digraph
// with gain-2 edge controllers: search a certificate split, simulate, and
// audit the dissipation inequalities along the trajectory.

#include <iostream>

#include "passnet/passivity.hpp"
#include "passnet/sim.hpp"

int main() {
  using namespace passnet;

  const Digraph graph(5, {{1, 2}, {2, 3}, {4, 3}, {5, 4}, {2, 5}, {3, 1}, {4, 1}, {5, 1}});
  std::vector<AgentModel> agents;
  for (const char* kind : {"integrator", "integrator", "integrator_tanh", "integrator_tanh",
                           "integrator_saturation"})
    agents.push_back(builtin_agent(kind));
  const NetworkSystem net =
      assemble(std::move(agents), std::vector<ControllerModel>(8, static_gain(2.0)), graph);

  const double M = slope_bound_M(net.output_maps());
  if (const auto split = static_gain_feasibility(graph, M, 2.0)) {
    std::cout << "feasible split: a = " << split->a << " (" << to_string(split->reading)
              << "), alpha = " << split->alpha << ", gamma = " << split->gamma << "\n";
  }

  const Trajectory traj = integrate(net, {0.23, -0.2, 1.0, -2.4, 0.0}, {1e-3, 20.0, 10});
  if (const auto c = detect_agreement(traj)) std::cout << "agreement value: " << *c << "\n";

  const ConstrainedStorage storage = ConstrainedStorage::from_output_maps(net.output_maps());
  const AuditReport forward = audit_agent_relation(traj, storage, M, 1e-4);
  const AuditReport feedback = audit_controller_relation(traj, graph, 1.0, 0.25, {}, 1e-4);
  std::cout << "agent relation: min residual " << forward.min_residual << ", "
            << forward.violation_count << " violations\n";
  std::cout << "controller relation: min residual " << feedback.min_residual << ", "
            << feedback.violation_count << " violations\n";
  return 0;
}
