#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "passnet/graph.hpp"
#include "passnet/models.hpp"

namespace passnet {

/// Offsets of each agent and controller state block inside the stacked
/// state vector. Layout: (x_1 .. x_|V|, eta_1 .. eta_|E|); static
/// controllers contribute empty blocks.
struct StateLayout {
  std::vector<int> agent_offset;
  std::vector<int> agent_dim;
  std::vector<int> controller_offset;
  std::vector<int> controller_dim;
  int total_dim = 0;
};

/// All six closed-loop signals at one time instant:
///   zeta = E^T y,  mu from the controllers,
///   u = -B_o mu,   w = B_i mu,  z = E mu,  u = w - z.
struct SignalFrame {
  Vec u, y, w, z;  // length |V|
  Vec zeta, mu;    // length |E|
};

/// The assembled closed loop: agents on vertices, controllers on edges.
/// Immutable after construction; derivative evaluation is pure.
class NetworkSystem {
 public:
  NetworkSystem(std::vector<AgentModel> agents, std::vector<ControllerModel> controllers,
                Digraph graph)
      : agents_(std::move(agents)),
        controllers_(std::move(controllers)),
        graph_(std::move(graph)),
        incidence_(incidence_matrices(graph_)),
        globally_reachable_(has_globally_reachable_node(graph_)) {
    if (agents_.size() != static_cast<std::size_t>(graph_.vertex_count))
      throw std::invalid_argument("NetworkSystem: agent count " + std::to_string(agents_.size()) +
                                  " does not match vertex count " +
                                  std::to_string(graph_.vertex_count));
    if (controllers_.size() != graph_.edge_count())
      throw std::invalid_argument("NetworkSystem: controller count " +
                                  std::to_string(controllers_.size()) +
                                  " does not match edge count " +
                                  std::to_string(graph_.edge_count()));
    int off = 0;
    for (const auto& a : agents_) {
      layout_.agent_offset.push_back(off);
      layout_.agent_dim.push_back(a.state_dim);
      off += a.state_dim;
    }
    for (const auto& c : controllers_) {
      layout_.controller_offset.push_back(off);
      layout_.controller_dim.push_back(c.state_dim);
      off += c.state_dim;
    }
    layout_.total_dim = off;
  }

  const Digraph& graph() const { return graph_; }
  const IncidenceSet& incidence() const { return incidence_; }
  const StateLayout& layout() const { return layout_; }
  const std::vector<AgentModel>& agents() const { return agents_; }
  const std::vector<ControllerModel>& controllers() const { return controllers_; }
  int state_dim() const { return layout_.total_dim; }

  /// True iff the graph has a globally reachable node. Assembly accepts
  /// graphs without one (simulation is still well-defined); the flag is
  /// surfaced in reports because the agreement certificates require it.
  bool globally_reachable() const { return globally_reachable_; }

  Vec outputs(std::span<const double> state) const {
    check_dim(state);
    Vec y(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i)
      y[i] = agents_[i].output(agent_block(state, i));
    return y;
  }

  /// Agent states as scalars; requires every agent to have state_dim 1.
  Vec scalar_agent_states(std::span<const double> state) const {
    check_dim(state);
    Vec x(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (agents_[i].state_dim != 1)
        throw std::invalid_argument("scalar_agent_states: agent " + std::to_string(i + 1) +
                                    " is not scalar");
      x[i] = state[static_cast<std::size_t>(layout_.agent_offset[i])];
    }
    return x;
  }

  SignalFrame signals_at(std::span<const double> state) const {
    check_dim(state);
    SignalFrame f;
    f.y = outputs(state);
    require_finite(f.y, "y");

    const std::size_t m = graph_.edge_count();
    f.zeta.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const auto [h, t] = graph_.edges[k];
      f.zeta[k] = f.y[h - 1] - f.y[t - 1];
    }
    require_finite(f.zeta, "zeta");

    f.mu.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k)
      f.mu[k] = controllers_[k].output(controller_block(state, k), f.zeta[k]);
    require_finite(f.mu, "mu");

    const std::size_t n = agents_.size();
    f.u.assign(n, 0.0);
    f.w.assign(n, 0.0);
    f.z.assign(n, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const auto [h, t] = graph_.edges[k];
      f.u[h - 1] -= f.mu[k];  // u = -B_o mu
      f.w[t - 1] -= f.mu[k];  // w = B_i mu
      f.z[h - 1] += f.mu[k];  // z = E mu
      f.z[t - 1] -= f.mu[k];
    }
    require_finite(f.u, "u");
    return f;
  }

  /// Stacked derivative of the closed loop at a given state. The time
  /// argument is unused (the loop is autonomous) but kept for solver use.
  void closed_loop_derivative(std::span<const double> state, double /*t*/,
                              std::span<double> dstate) const {
    if (dstate.size() != static_cast<std::size_t>(layout_.total_dim))
      throw std::invalid_argument("closed_loop_derivative: output dimension mismatch");
    const SignalFrame f = signals_at(state);
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      agents_[i].derivative(agent_block(state, i), f.u[i], mutable_block(dstate, layout_.agent_offset[i], layout_.agent_dim[i]));
    }
    for (std::size_t k = 0; k < controllers_.size(); ++k) {
      controllers_[k].derivative(controller_block(state, k), f.zeta[k],
                                 mutable_block(dstate, layout_.controller_offset[k],
                                               layout_.controller_dim[k]));
    }
    if (!all_finite(dstate)) throw std::runtime_error("closed_loop_derivative: non-finite value in signal xdot");
  }

  Vec closed_loop_derivative(std::span<const double> state, double t = 0.0) const {
    Vec d(static_cast<std::size_t>(layout_.total_dim));
    closed_loop_derivative(state, t, d);
    return d;
  }

  /// True iff every agent is an integrator-like built-in (xdot = u with a
  /// declared monotone passive output map).
  bool all_agents_integrator_like() const {
    for (const auto& a : agents_)
      if (!a.output_map.has_value() || a.state_dim != 1) return false;
    return true;
  }

  std::vector<OutputMap> output_maps() const {
    std::vector<OutputMap> maps;
    for (const auto& a : agents_) {
      if (!a.output_map.has_value())
        throw std::invalid_argument("output_maps: an agent has no declared output map");
      maps.push_back(*a.output_map);
    }
    return maps;
  }

 private:
  std::span<const double> agent_block(std::span<const double> state, std::size_t i) const {
    return state.subspan(static_cast<std::size_t>(layout_.agent_offset[i]),
                         static_cast<std::size_t>(layout_.agent_dim[i]));
  }
  std::span<const double> controller_block(std::span<const double> state, std::size_t k) const {
    return state.subspan(static_cast<std::size_t>(layout_.controller_offset[k]),
                         static_cast<std::size_t>(layout_.controller_dim[k]));
  }
  static std::span<double> mutable_block(std::span<double> v, int off, int dim) {
    return v.subspan(static_cast<std::size_t>(off), static_cast<std::size_t>(dim));
  }
  void check_dim(std::span<const double> state) const {
    if (state.size() != static_cast<std::size_t>(layout_.total_dim))
      throw std::invalid_argument("NetworkSystem: stacked state has length " +
                                  std::to_string(state.size()) + ", expected " +
                                  std::to_string(layout_.total_dim));
  }
  static void require_finite(const Vec& v, const char* signal) {
    if (!all_finite(v))
      throw std::runtime_error(std::string("NetworkSystem: non-finite value in signal ") +
                               signal);
  }

  std::vector<AgentModel> agents_;
  std::vector<ControllerModel> controllers_;
  Digraph graph_;
  IncidenceSet incidence_;
  StateLayout layout_;
  bool globally_reachable_;
};

inline NetworkSystem assemble(std::vector<AgentModel> agents,
                              std::vector<ControllerModel> controllers, Digraph graph) {
  return NetworkSystem(std::move(agents), std::move(controllers), std::move(graph));
}

}  // namespace passnet
