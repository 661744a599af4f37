#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "passnet/network.hpp"

namespace passnet {

/// Fixed-step solver settings. t_end must be an integer number of steps
/// and the step count a multiple of record_stride, so recorded samples
/// stay uniformly spaced.
struct IntegrationConfig {
  double dt = 1e-3;
  double t_end = 20.0;
  int record_stride = 1;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("IntegrationConfig: dt must be positive and finite");
    if (!(t_end > dt) || !std::isfinite(t_end))
      throw std::invalid_argument("IntegrationConfig: t_end must exceed dt");
    if (record_stride < 1) throw std::invalid_argument("IntegrationConfig: record_stride must be >= 1");
    const double steps = t_end / dt;
    const auto rounded = static_cast<long long>(std::llround(steps));
    if (std::abs(steps - static_cast<double>(rounded)) > 1e-6)
      throw std::invalid_argument("IntegrationConfig: t_end must be an integer number of steps");
    if (rounded % record_stride != 0)
      throw std::invalid_argument("IntegrationConfig: step count must be divisible by record_stride");
  }

  long long step_count() const { return static_cast<long long>(std::llround(t_end / dt)); }
};

/// Recorded closed-loop run: stacked states and the six signals at
/// uniformly spaced sample times.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<SignalFrame> frames;
  double sample_dt = 0.0;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

/// Thrown when a state magnitude exceeds the blow-up threshold; carries
/// the first offending time so divergence is reported, not crashed on.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(double t, double magnitude)
      : std::runtime_error("state blow-up at t = " + std::to_string(t) +
                           " (|state| = " + std::to_string(magnitude) + ")"),
        time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

inline constexpr double kBlowupThreshold = 1e12;

/// Classical fixed-step fourth-order Runge-Kutta over the closed loop.
/// Deterministic for fixed inputs.
inline Trajectory integrate(const NetworkSystem& net, Vec x0, const IntegrationConfig& cfg) {
  cfg.validate();
  if (x0.size() != static_cast<std::size_t>(net.state_dim()))
    throw std::invalid_argument("integrate: x0 has length " + std::to_string(x0.size()) +
                                ", expected " + std::to_string(net.state_dim()));
  if (!all_finite(x0)) throw std::invalid_argument("integrate: x0 contains non-finite entries");

  const std::size_t dim = x0.size();
  const long long steps = cfg.step_count();
  Trajectory traj;
  traj.sample_dt = cfg.dt * cfg.record_stride;
  traj.times.reserve(static_cast<std::size_t>(steps / cfg.record_stride) + 1);

  Vec x = std::move(x0);
  Vec k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.frames.push_back(net.signals_at(x));
  };
  record(0.0);

  for (long long s = 0; s < steps; ++s) {
    const double t = cfg.dt * static_cast<double>(s);
    const double half = 0.5 * cfg.dt;

    net.closed_loop_derivative(x, t, k1);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + half * k1[i];
    net.closed_loop_derivative(tmp, t + half, k2);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + half * k2[i];
    net.closed_loop_derivative(tmp, t + half, k3);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + cfg.dt * k3[i];
    net.closed_loop_derivative(tmp, t + cfg.dt, k4);
    for (std::size_t i = 0; i < dim; ++i)
      x[i] += cfg.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    const double t_next = cfg.dt * static_cast<double>(s + 1);
    for (double v : x) {
      if (!std::isfinite(v) || std::abs(v) > kBlowupThreshold)
        throw BlowupError(t_next, std::abs(v));
    }
    if ((s + 1) % cfg.record_stride == 0) record(t_next);
  }
  return traj;
}

/// Euclidean norm of the disagreement component of y at every sample.
inline std::vector<std::pair<double, double>> disagreement_series(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("disagreement_series: empty trajectory");
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vec& y = traj.frames[i].y;
    const double m = mean(y);
    double acc = 0.0;
    for (double v : y) acc += (v - m) * (v - m);
    out.emplace_back(traj.times[i], std::sqrt(acc));
  }
  return out;
}

/// Finite-window agreement detector. Returns the mean of the final output
/// vector iff, over the trailing `window` seconds, the disagreement norm
/// stays within tol and the mean output drifts by at most tol.
inline std::optional<double> detect_agreement(const Trajectory& traj, double tol = 1e-4,
                                              double window = 2.0) {
  if (traj.empty()) throw std::invalid_argument("detect_agreement: empty trajectory");
  const double t_end = traj.times.back();
  if (window > t_end - traj.times.front())
    throw std::invalid_argument("detect_agreement: window longer than trajectory");

  const double final_mean = mean(traj.frames.back().y);
  for (std::size_t i = traj.size(); i-- > 0;) {
    if (traj.times[i] < t_end - window) break;
    const Vec& y = traj.frames[i].y;
    const double m = mean(y);
    double acc = 0.0;
    for (double v : y) acc += (v - m) * (v - m);
    if (std::sqrt(acc) > tol) return std::nullopt;
    if (std::abs(m - final_mean) > tol) return std::nullopt;
  }
  return final_mean;
}

}  // namespace passnet
