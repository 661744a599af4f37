#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace passnet {

/// Scalar output nonlinearity of an integrator-like agent, together with
/// its declared slope bound m (0 <= dh/ds <= m for monotone passive maps).
struct OutputMap {
  std::string name;
  std::function<double(double)> fn;
  double slope_bound = 1.0;
  bool monotone_passive = false;
};

/// Passivity index pair. Agents carry (delta, epsilon) = (input, output);
/// edge controllers carry (gamma, alpha) = (input, output). Admissible
/// index pairs satisfy input * output < 1/4.
struct PassivityIndices {
  double input = 0.0;
  double output = 0.0;

  bool admissible() const { return input * output < 0.25; }
};

enum class AgentKind { Integrator, IntegratorWithOutputMap, GeneralOde };

/// SISO agent: xdot = f(x, u), y = h(x). State may be vector-valued for
/// GeneralOde agents; the built-in integrator family is scalar.
struct AgentModel {
  int state_dim = 1;
  AgentKind kind = AgentKind::Integrator;
  std::function<void(std::span<const double>, double, std::span<double>)> derivative;
  std::function<double(std::span<const double>)> output;
  std::optional<OutputMap> output_map;  // present for the integrator family
  std::optional<PassivityIndices> indices;
};

enum class ControllerKind { StaticGain, GeneralOde };

/// SISO edge controller: etadot = phi(eta, zeta), mu = psi(eta, zeta).
/// Static gains are stateless (state_dim = 0).
struct ControllerModel {
  int state_dim = 0;
  ControllerKind kind = ControllerKind::StaticGain;
  double gain = 1.0;  // meaningful for StaticGain only
  std::function<void(std::span<const double>, double, std::span<double>)> derivative;
  std::function<double(std::span<const double>, double)> output;
  std::optional<PassivityIndices> indices;
};

/// M = max(1, |1 - m*|), m* the largest slope bound among the maps.
inline double slope_bound_M(const std::vector<OutputMap>& maps) {
  if (maps.empty()) throw std::invalid_argument("slope_bound_M: no output maps");
  double m_star = 0.0;
  for (const auto& map : maps) {
    if (!map.monotone_passive)
      throw std::invalid_argument("slope_bound_M: map '" + map.name +
                                  "' is not flagged monotone passive");
    if (!(map.slope_bound > 0.0))
      throw std::invalid_argument("slope_bound_M: map '" + map.name +
                                  "' has non-positive slope bound");
    m_star = std::max(m_star, map.slope_bound);
  }
  return std::max(1.0, std::abs(1.0 - m_star));
}

/// Componentwise minimum over a group of index pairs.
inline PassivityIndices aggregate_indices(const std::vector<PassivityIndices>& members) {
  if (members.empty()) throw std::invalid_argument("aggregate_indices: empty list");
  PassivityIndices agg = members.front();
  for (const auto& p : members) {
    agg.input = std::min(agg.input, p.input);
    agg.output = std::min(agg.output, p.output);
  }
  return agg;
}

/// Checks 0 <= (h(s+d) - h(s))/d <= m + tol on a uniform grid, and that
/// the map is not identically zero there (monotone passive maps exclude
/// the trivial map; only the exactly-zero case is rejected).
inline bool slope_grid_ok(const OutputMap& map, double lo = -10.0, double hi = 10.0,
                          int points = 10000, double tol = 1e-8) {
  const double d = (hi - lo) / static_cast<double>(points);
  double prev = map.fn(lo);
  double magnitude = std::abs(prev);
  for (int i = 1; i <= points; ++i) {
    const double s = lo + d * i;
    const double cur = map.fn(s);
    const double slope = (cur - prev) / d;
    if (slope < -tol || slope > map.slope_bound + tol) return false;
    magnitude = std::max(magnitude, std::abs(cur));
    prev = cur;
  }
  return magnitude > 0.0;
}

namespace detail {

inline AgentModel integrator_with_map(OutputMap map, AgentKind kind) {
  AgentModel a;
  a.state_dim = 1;
  a.kind = kind;
  a.derivative = [](std::span<const double>, double u, std::span<double> dx) { dx[0] = u; };
  a.output = [fn = map.fn](std::span<const double> x) { return fn(x[0]); };
  a.output_map = std::move(map);
  a.indices = PassivityIndices{0.0, 0.0};  // integrator-like agents are passive
  return a;
}

}  // namespace detail

/// Factory for the built-in agent family. Kinds:
///   integrator             y = x
///   integrator_tanh        y = tanh(x)
///   integrator_saturation  y = x / (1 + |x|)
/// All three have slope bound m = 1.
inline AgentModel builtin_agent(const std::string& kind) {
  if (kind == "integrator") {
    OutputMap map{"identity", [](double s) { return s; }, 1.0, true};
    return detail::integrator_with_map(std::move(map), AgentKind::Integrator);
  }
  if (kind == "integrator_tanh") {
    OutputMap map{"tanh", [](double s) { return std::tanh(s); }, 1.0, true};
    return detail::integrator_with_map(std::move(map), AgentKind::IntegratorWithOutputMap);
  }
  if (kind == "integrator_saturation") {
    OutputMap map{"saturation", [](double s) { return s / (1.0 + std::abs(s)); }, 1.0, true};
    return detail::integrator_with_map(std::move(map), AgentKind::IntegratorWithOutputMap);
  }
  throw std::invalid_argument("builtin_agent: unknown kind '" + kind + "'");
}

/// GeneralOde agent from user-supplied closures. Passivity indices, if
/// declared, are taken on trust and only audited along trajectories.
inline AgentModel general_agent(
    int state_dim,
    std::function<void(std::span<const double>, double, std::span<double>)> f,
    std::function<double(std::span<const double>)> h,
    std::optional<PassivityIndices> indices = std::nullopt) {
  if (state_dim <= 0) throw std::invalid_argument("general_agent: state_dim must be positive");
  AgentModel a;
  a.state_dim = state_dim;
  a.kind = AgentKind::GeneralOde;
  a.derivative = std::move(f);
  a.output = std::move(h);
  a.indices = indices;
  return a;
}

/// Static edge controller mu = b * zeta. For b > 0 it is output strictly
/// passive with zero storage: mu * zeta = (1/b) mu^2.
inline ControllerModel static_gain(double b) {
  ControllerModel c;
  c.state_dim = 0;
  c.kind = ControllerKind::StaticGain;
  c.gain = b;
  c.derivative = [](std::span<const double>, double, std::span<double>) {};
  c.output = [b](std::span<const double>, double zeta) { return b * zeta; };
  return c;
}

inline ControllerModel general_controller(
    int state_dim,
    std::function<void(std::span<const double>, double, std::span<double>)> phi,
    std::function<double(std::span<const double>, double)> psi,
    std::optional<PassivityIndices> indices = std::nullopt) {
  if (state_dim < 0) throw std::invalid_argument("general_controller: negative state_dim");
  ControllerModel c;
  c.state_dim = state_dim;
  c.kind = ControllerKind::GeneralOde;
  c.derivative = std::move(phi);
  c.output = std::move(psi);
  c.indices = indices;
  return c;
}

}  // namespace passnet
