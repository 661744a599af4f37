// Minimal library walkthrough: integrators with unit gains on a directed
// 3-cycle converge to the average of the initial state.

#include <iostream>

#include "passnet/passivity.hpp"
#include "passnet/sim.hpp"

int main() {
  using namespace passnet;

  const Digraph cycle(3, {{1, 2}, {2, 3}, {3, 1}});
  const NetworkSystem net =
      assemble({builtin_agent("integrator"), builtin_agent("integrator"),
                builtin_agent("integrator")},
               {static_gain(1.0), static_gain(1.0), static_gain(1.0)}, cycle);

  const Trajectory traj = integrate(net, {1.0, 2.0, 3.0}, {1e-3, 10.0, 10});
  if (const auto c = detect_agreement(traj)) {
    std::cout << "agreement value: " << *c << "\n";
  } else {
    std::cout << "no agreement detected\n";
  }

  const auto cert = agreement_certificate(cycle, 1.0, 0.5, 0.5);
  std::cout << "certificate: " << (cert.pass ? "pass" : "fail") << " (alpha margin "
            << cert.alpha_margin << ", gamma margin " << cert.gamma_margin << ")\n";
  return 0;
}
