#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "passnet/graph.hpp"
#include "passnet/matrix.hpp"
#include "passnet/models.hpp"
#include "passnet/network.hpp"
#include "passnet/sim.hpp"

namespace passnet {

/// Orthogonal projector onto the disagreement subspace, the orthogonal
/// complement of span(1). Applied as v - mean(v); the dense matrix form
/// I - (1/n) 1 1^T is materialized only on request.
struct Projector {
  int n = 0;

  explicit Projector(int dim) : n(dim) {
    if (dim <= 0) throw std::invalid_argument("Projector: dimension must be positive");
  }

  Vec apply(std::span<const double> v) const {
    if (v.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("Projector: vector length " + std::to_string(v.size()) +
                                  " does not match dimension " + std::to_string(n));
    const double m = mean(v);
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - m;
    return out;
  }

  Matrix matrix() const {
    Matrix p(static_cast<std::size_t>(n), static_cast<std::size_t>(n),
             -1.0 / static_cast<double>(n));
    for (int i = 0; i < n; ++i)
      p(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) += 1.0;
    return p;
  }
};

inline Vec proj_disagreement(const Projector& p, std::span<const double> v) {
  return p.apply(v);
}

/// Storage function constrained to the agreement subspace:
/// Q(x) = (1/2) h(x)^T P h(x), zero exactly when the outputs agree.
struct ConstrainedStorage {
  std::vector<std::function<double(double)>> maps;  // h_i, one per scalar agent

  static ConstrainedStorage from_output_maps(const std::vector<OutputMap>& oms) {
    ConstrainedStorage cs;
    for (const auto& om : oms) cs.maps.push_back(om.fn);
    return cs;
  }

  static ConstrainedStorage identity(int n) {
    ConstrainedStorage cs;
    for (int i = 0; i < n; ++i) cs.maps.emplace_back([](double s) { return s; });
    return cs;
  }

  double value(std::span<const double> agent_states) const {
    if (agent_states.size() != maps.size())
      throw std::invalid_argument("ConstrainedStorage: state length " +
                                  std::to_string(agent_states.size()) + " does not match " +
                                  std::to_string(maps.size()) + " output maps");
    Vec h(maps.size());
    for (std::size_t i = 0; i < maps.size(); ++i) h[i] = maps[i](agent_states[i]);
    return value_from_outputs(h);
  }

  /// Q expressed through the outputs: (1/2) ||proj_disagreement(y)||^2.
  static double value_from_outputs(std::span<const double> y) {
    const double m = mean(y);
    double acc = 0.0;
    for (double v : y) acc += (v - m) * (v - m);
    return 0.5 * acc;
  }
};

inline double constrained_storage_value(const ConstrainedStorage& cs,
                                        std::span<const double> agent_states) {
  return cs.value(agent_states);
}

/// Pointwise inequality audit along a trajectory. Residuals are
/// LHS - RHS in supply-rate units; a sample counts as a violation when
/// its residual drops below -tolerance.
struct AuditReport {
  std::string id;
  std::vector<double> residuals;
  double min_residual = 0.0;
  std::size_t violation_count = 0;
  double tolerance = 0.0;

  static AuditReport from_residuals(std::string id, std::vector<double> res, double tol) {
    AuditReport r;
    r.id = std::move(id);
    r.residuals = std::move(res);
    r.tolerance = tol;
    r.min_residual = r.residuals.empty() ? 0.0 : r.residuals.front();
    for (double v : r.residuals) {
      r.min_residual = std::min(r.min_residual, v);
      if (v < -tol) ++r.violation_count;
    }
    return r;
  }
};

/// Time derivative of a sampled series by central differences, with
/// second-order one-sided stencils at both endpoints.
inline std::vector<double> finite_difference_derivative(const std::vector<double>& f,
                                                        double dt) {
  if (f.size() < 3)
    throw std::invalid_argument("finite_difference_derivative: need at least 3 samples");
  if (!(dt > 0.0)) throw std::invalid_argument("finite_difference_derivative: dt must be positive");
  const std::size_t n = f.size();
  std::vector<double> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
  return d;
}

/// Q along a trajectory, evaluated from the recorded outputs.
inline std::vector<double> constrained_storage_series(const Trajectory& traj) {
  std::vector<double> q(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    q[i] = ConstrainedStorage::value_from_outputs(traj.frames[i].y);
  return q;
}

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Integral of a scalar map from 0 to x by adaptive Simpson quadrature.
inline double integral_from_zero(const std::function<double(double)>& f, double x,
                                 double tol = 1e-10) {
  if (x == 0.0) return 0.0;
  const double a = std::min(0.0, x), b = std::max(0.0, x);
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double val = detail::adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
  return x > 0.0 ? val : -val;
}

/// Storage of the integrator-like agent group along a trajectory:
/// sum_i of the integral of h_i from 0 to x_i. For the plain integrator
/// this reduces to sum x_i^2 / 2.
inline std::vector<double> agent_storage_series(const NetworkSystem& net,
                                                const Trajectory& traj) {
  const auto maps = net.output_maps();
  std::vector<double> v(traj.size(), 0.0);
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const Vec x = net.scalar_agent_states(traj.states[s]);
    double acc = 0.0;
    for (std::size_t i = 0; i < maps.size(); ++i) acc += integral_from_zero(maps[i].fn, x[i]);
    v[s] = acc;
  }
  return v;
}

namespace detail {

struct FrameSeries {
  std::vector<double> u_dot_proj, w_dot_proj, z_dot_proj;
  std::vector<double> u_sq, y_sq, mu_sq, proj_sq;
};

inline FrameSeries frame_series(const Trajectory& traj) {
  FrameSeries s;
  const std::size_t n = traj.size();
  s.u_dot_proj.resize(n);
  s.w_dot_proj.resize(n);
  s.z_dot_proj.resize(n);
  s.u_sq.resize(n);
  s.y_sq.resize(n);
  s.mu_sq.resize(n);
  s.proj_sq.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SignalFrame& f = traj.frames[i];
    const double m = mean(f.y);
    double up = 0.0, wp = 0.0, zp = 0.0, ps = 0.0;
    for (std::size_t j = 0; j < f.y.size(); ++j) {
      const double p = f.y[j] - m;
      up += f.u[j] * p;
      wp += f.w[j] * p;
      zp += f.z[j] * p;
      ps += p * p;
    }
    s.u_dot_proj[i] = up;
    s.w_dot_proj[i] = wp;
    s.z_dot_proj[i] = zp;
    s.proj_sq[i] = ps;
    s.u_sq[i] = norm2_squared(f.u);
    s.y_sq[i] = norm2_squared(f.y);
    s.mu_sq[i] = norm2_squared(f.mu);
  }
  return s;
}

inline void check_audit_inputs(const Trajectory& traj, const std::vector<double>& storage,
                               const char* who) {
  if (traj.size() < 3)
    throw std::invalid_argument(std::string(who) + ": need at least 3 trajectory samples");
  if (!storage.empty() && storage.size() != traj.size())
    throw std::invalid_argument(std::string(who) + ": storage series length mismatch");
}

inline std::vector<double> storage_derivative_or_zero(const std::vector<double>& storage,
                                                      const Trajectory& traj) {
  if (storage.empty()) return std::vector<double>(traj.size(), 0.0);
  return finite_difference_derivative(storage, traj.sample_dt);
}

}  // namespace detail

/// Forward-path audit for integrator-like agents:
///   u . proj(y) >= dQ/dt - (M/2)||u||^2 - (M/2)||proj(y)||^2
/// with dQ/dt estimated by finite differences along the trajectory.
inline AuditReport audit_agent_relation(const Trajectory& traj, const ConstrainedStorage& cs,
                                        double M, double tol) {
  detail::check_audit_inputs(traj, {}, "audit_agent_relation");
  if (!(M > 0.0)) throw std::invalid_argument("audit_agent_relation: M must be positive");
  std::vector<double> q(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vec x = traj.states[i].size() == cs.maps.size()
                      ? traj.states[i]
                      : Vec(traj.states[i].begin(),
                            traj.states[i].begin() + static_cast<long>(cs.maps.size()));
    q[i] = cs.value(x);
  }
  const auto qdot = finite_difference_derivative(q, traj.sample_dt);
  const auto s = detail::frame_series(traj);
  std::vector<double> res(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    res[i] = s.u_dot_proj[i] - qdot[i] + 0.5 * M * s.u_sq[i] + 0.5 * M * s.proj_sq[i];
  return AuditReport::from_residuals("agent_relation", std::move(res), tol);
}

/// Which Laplacian eigenvalue bounds the disagreement quadratic form in
/// the controller-relation audit. The largest eigenvalue is the caller-
/// selected variant that stays valid for negative controller indices.
enum class LaplacianBound { SecondSmallest, Largest };

/// Feedback-path audit:
///   z . proj(y) >= dW/dt + alpha ||mu||^2 + gamma lambda ||proj(y)||^2.
/// W is the summed controller storage series (empty means identically 0,
/// the static-gain case).
inline AuditReport audit_controller_relation(const Trajectory& traj, const Digraph& g,
                                             double gamma, double alpha,
                                             const std::vector<double>& controller_storage,
                                             double tol,
                                             LaplacianBound bound = LaplacianBound::SecondSmallest) {
  detail::check_audit_inputs(traj, controller_storage, "audit_controller_relation");
  if (bound == LaplacianBound::SecondSmallest && (gamma < 0.0 || alpha < 0.0))
    throw std::invalid_argument(
        "audit_controller_relation: negative indices require the largest-eigenvalue bound");
  const SpectralSummary summary = undirected_spectrum(g);
  const double lambda = bound == LaplacianBound::SecondSmallest ? summary.lambda2 : summary.lambda_max;
  const auto wdot = detail::storage_derivative_or_zero(controller_storage, traj);
  const auto s = detail::frame_series(traj);
  std::vector<double> res(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    res[i] = s.z_dot_proj[i] - wdot[i] - alpha * s.mu_sq[i] - gamma * lambda * s.proj_sq[i];
  return AuditReport::from_residuals("controller_relation", std::move(res), tol);
}

/// Compensation audit with an explicit forward-path storage series:
///   w . proj(y) >= dS/dt + dW/dt + eps ||proj(y)||^2.
inline AuditReport audit_compensation_series(const Trajectory& traj,
                                             const std::vector<double>& forward_storage,
                                             const std::vector<double>& controller_storage,
                                             double eps, double tol) {
  detail::check_audit_inputs(traj, forward_storage, "audit_compensation");
  detail::check_audit_inputs(traj, controller_storage, "audit_compensation");
  if (!(eps > 0.0)) throw std::invalid_argument("audit_compensation: eps must be positive");
  const auto sdot = detail::storage_derivative_or_zero(forward_storage, traj);
  const auto wdot = detail::storage_derivative_or_zero(controller_storage, traj);
  const auto s = detail::frame_series(traj);
  std::vector<double> res(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    res[i] = s.w_dot_proj[i] - sdot[i] - wdot[i] - eps * s.proj_sq[i];
  return AuditReport::from_residuals("compensation", std::move(res), tol);
}

/// Compensation audit with the constrained storage Q computed from the
/// recorded outputs.
inline AuditReport audit_compensation(const Trajectory& traj, const ConstrainedStorage&,
                                      const std::vector<double>& controller_storage, double eps,
                                      double tol) {
  return audit_compensation_series(traj, constrained_storage_series(traj), controller_storage,
                                   eps, tol);
}

/// Individual-passivity audit of the forward path:
///   u . proj(y) >= dV/dt + (delta - 1/2)||u||^2 + (eps - 1/2)||y||^2,
/// V the summed agent storage series.
inline AuditReport audit_iop_agent_relation(const Trajectory& traj,
                                            const std::vector<double>& agent_storage,
                                            double delta, double eps, double tol) {
  if (agent_storage.empty())
    throw std::invalid_argument("audit_iop_agent_relation: agent storage series required");
  detail::check_audit_inputs(traj, agent_storage, "audit_iop_agent_relation");
  if (!(delta * eps < 0.25))
    throw std::invalid_argument("audit_iop_agent_relation: indices must satisfy delta*eps < 1/4");
  const auto vdot = finite_difference_derivative(agent_storage, traj.sample_dt);
  const auto s = detail::frame_series(traj);
  std::vector<double> res(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    res[i] = s.u_dot_proj[i] - vdot[i] - (delta - 0.5) * s.u_sq[i] - (eps - 0.5) * s.y_sq[i];
  return AuditReport::from_residuals("iop_agent", std::move(res), tol);
}

/// Sufficient-condition certificate for output agreement of integrator-
/// like agents: alpha >= max(D_o) M / 2 and gamma lambda2 > M / 2.
struct CertificateReport {
  double M = 0.0;
  double max_out_deg = 0.0;
  double lambda2 = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  double alpha_margin = 0.0;  // alpha - max(D_o) M / 2
  double gamma_margin = 0.0;  // gamma lambda2 - M / 2
  bool pass = false;          // alpha_margin >= 0 and gamma_margin > 0
  bool globally_reachable = false;
};

inline CertificateReport agreement_certificate(const Digraph& g, double M, double alpha,
                                               double gamma) {
  if (!(M > 0.0)) throw std::invalid_argument("agreement_certificate: M must be positive");
  if (alpha < 0.0 || gamma < 0.0)
    throw std::invalid_argument("agreement_certificate: alpha and gamma must be non-negative");
  CertificateReport r;
  r.M = M;
  r.max_out_deg = static_cast<double>(max_out_degree(g));
  r.lambda2 = undirected_spectrum(g).lambda2;
  r.alpha = alpha;
  r.gamma = gamma;
  r.alpha_margin = alpha - r.max_out_deg * M / 2.0;
  r.gamma_margin = gamma * r.lambda2 - M / 2.0;
  r.pass = r.alpha_margin >= 0.0 && r.gamma_margin > 0.0;
  r.globally_reachable = has_globally_reachable_node(g);
  return r;
}

/// Role assignment for the static-gain supply split
///   b ||zeta||^2 = (a b) ||zeta||^2 + ((1-a)/b) ||mu||^2,  0 < a < 1.
/// AlphaOnMu reads alpha as the ||mu||^2 coefficient (1-a)/b and gamma as
/// the ||zeta||^2 coefficient a b; AlphaOnZeta swaps the two roles.
enum class GainReading { AlphaOnMu, AlphaOnZeta };

struct GainSplit {
  double a = 0.0;
  double zeta_coeff = 0.0;  // a b, the ||zeta||^2 share of the supply
  double mu_coeff = 0.0;    // (1-a)/b, the ||mu||^2 share
  double gamma = 0.0;       // role-assigned per the reading
  double alpha = 0.0;
  double alpha_margin = 0.0;
  double gamma_margin = 0.0;
  double min_margin = 0.0;
  GainReading reading = GainReading::AlphaOnMu;
};

inline const char* to_string(GainReading r) {
  return r == GainReading::AlphaOnMu ? "alpha-on-mu" : "alpha-on-zeta";
}

/// Evaluates one split candidate under a given reading.
inline GainSplit evaluate_gain_split(double a, double b, double M, double max_do,
                                     double lambda2, GainReading reading) {
  GainSplit s;
  s.a = a;
  s.reading = reading;
  s.zeta_coeff = a * b;
  s.mu_coeff = (1.0 - a) / b;
  if (reading == GainReading::AlphaOnMu) {
    s.gamma = s.zeta_coeff;
    s.alpha = s.mu_coeff;
  } else {
    s.gamma = s.mu_coeff;
    s.alpha = s.zeta_coeff;
  }
  s.alpha_margin = s.alpha - max_do * M / 2.0;
  s.gamma_margin = s.gamma * lambda2 - M / 2.0;
  s.min_margin = std::min(s.alpha_margin, s.gamma_margin);
  return s;
}

inline bool split_feasible(const GainSplit& s) {
  return s.alpha_margin >= 0.0 && s.gamma_margin > 0.0;
}

/// Searches a in (0,1) for a feasible split under one reading; returns
/// the split with the largest minimum margin, or nothing.
inline std::optional<GainSplit> static_gain_feasibility(const Digraph& g, double M, double b,
                                                        GainReading reading,
                                                        int grid = 9999) {
  if (!(b > 0.0)) throw std::invalid_argument("static_gain_feasibility: b must be positive");
  if (!(M > 0.0)) throw std::invalid_argument("static_gain_feasibility: M must be positive");
  const double max_do = static_cast<double>(max_out_degree(g));
  const double lambda2 = undirected_spectrum(g).lambda2;
  std::optional<GainSplit> best;
  for (int i = 1; i <= grid; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(grid + 1);
    const GainSplit s = evaluate_gain_split(a, b, M, max_do, lambda2, reading);
    if (!split_feasible(s)) continue;
    if (!best || s.min_margin > best->min_margin) best = s;
  }
  return best;
}

/// Both role readings; the better minimum margin wins. The reading that
/// succeeded is recorded on the returned split.
inline std::optional<GainSplit> static_gain_feasibility(const Digraph& g, double M, double b) {
  const auto on_mu = static_gain_feasibility(g, M, b, GainReading::AlphaOnMu);
  const auto on_zeta = static_gain_feasibility(g, M, b, GainReading::AlphaOnZeta);
  if (on_mu && on_zeta) return on_mu->min_margin >= on_zeta->min_margin ? on_mu : on_zeta;
  return on_mu ? on_mu : on_zeta;
}

/// Two-sided Rayleigh bound of the undirected Laplacian quadratic form
/// against the disagreement norm.
struct RayleighCheck {
  bool lower_ok = false;
  bool upper_ok = false;
  double quadratic_form = 0.0;
};

inline RayleighCheck rayleigh_bounds_check(const Digraph& g, std::span<const double> y) {
  if (!undirected_connected(g))
    throw std::invalid_argument("rayleigh_bounds_check: undirected counterpart is disconnected");
  if (y.size() != static_cast<std::size_t>(g.vertex_count))
    throw std::invalid_argument("rayleigh_bounds_check: vector length mismatch");
  const SpectralSummary summary = undirected_spectrum(g);
  const Matrix L = laplacians(g).L;
  const Vec ly = L.apply(y);
  const double quad = dot(y, ly);
  const Projector p(g.vertex_count);
  const double proj_sq = norm2_squared(p.apply(y));
  const double tol = 1e-9 * norm2_squared(y);
  RayleighCheck r;
  r.quadratic_form = quad;
  r.lower_ok = summary.lambda2 * proj_sq <= quad + tol;
  r.upper_ok = quad <= summary.lambda_max * proj_sq + tol;
  return r;
}

}  // namespace passnet
