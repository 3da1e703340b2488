#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "mrlab/trajectory.hpp"

namespace mrlab {

/// Abstract quasilinear evolution u' + A(t,u)u = f(t,u).  The state type only
/// needs value semantics and linear arithmetic; the four callables carry all
/// problem structure, including how the shifted solve is performed.
template <class State>
struct QuasilinearProblem {
  std::function<State(double t, const State& u, const State& v)> apply_A;
  /// Solves (I + tau A(t,u)) w = rhs.
  std::function<State(double t, const State& u, const State& rhs, double tau)> solve_shifted;
  std::function<State(double t, const State& u)> eval_f;
  std::function<double(const State& u)> state_norm;
};

struct StepConfig {
  double dt = 1e-2;
  int picard_iters = 1;
  double blowup_threshold = 1e6;
  double linear_tol = 1e-10;

  void validate() const {
    if (!(dt > 0.0) || picard_iters < 1 || !(blowup_threshold > 0.0) || !(linear_tol > 0.0))
      throw std::invalid_argument("StepConfig: all entries must be positive");
  }
};

/// One frozen-coefficient implicit Euler step:
///   (I + dt A(t, u~)) u+ = u + dt f(t, u~),
/// with u~ = u on the first Picard pass and the previous iterate afterwards.
template <class State>
State step(const QuasilinearProblem<State>& prob, double t, const State& u, const StepConfig& cfg) {
  cfg.validate();
  State u_tilde = u;
  State result = u;
  for (int it = 0; it < cfg.picard_iters; ++it) {
    State rhs = u + cfg.dt * prob.eval_f(t, u_tilde);
    result = prob.solve_shifted(t, u_tilde, rhs, cfg.dt);
    u_tilde = result;
  }
  return result;
}

/// Repeated stepping from t0 to T.  After every step the state norm is
/// checked against the blow-up threshold; on a crossing the offending state
/// is retained, the status switches to blowup and integration stops.
template <class State>
Trajectory<State> integrate(const QuasilinearProblem<State>& prob, const State& u0, double t0,
                            double T, const StepConfig& cfg) {
  cfg.validate();
  if (!(T > t0)) throw std::invalid_argument("integrate: need T > t0");
  const int K = static_cast<int>(std::lround((T - t0) / cfg.dt));
  if (K < 1 || std::fabs(t0 + K * cfg.dt - T) > 1e-9 * std::max(1.0, std::fabs(T)))
    throw std::invalid_argument("integrate: (T - t0) must be a positive multiple of dt");
  Trajectory<State> tr;
  tr.t0 = t0;
  tr.dt = cfg.dt;
  tr.states.reserve(K + 1);
  tr.states.push_back(u0);
  if (prob.state_norm(u0) > cfg.blowup_threshold) {
    tr.status = RunStatus::blowup;
    tr.blowup_time = t0;
    return tr;
  }
  State u = u0;
  for (int k = 0; k < K; ++k) {
    u = step(prob, t0 + k * cfg.dt, u, cfg);
    tr.states.push_back(u);
    if (prob.state_norm(u) > cfg.blowup_threshold) {
      tr.status = RunStatus::blowup;
      tr.blowup_time = t0 + (k + 1) * cfg.dt;
      return tr;
    }
  }
  tr.status = RunStatus::completed;
  return tr;
}

/// Existence-time probe: blowup_time when the threshold is crossed before
/// t_max, otherwise "survived at least t_max" (empty optional).
struct ExistenceEstimate {
  std::optional<double> blowup_time;
  double t_max = 0.0;
  bool blew_up() const { return blowup_time.has_value(); }
};

template <class State>
ExistenceEstimate estimate_existence_time(const QuasilinearProblem<State>& prob, const State& u0,
                                          double t0, double t_max, const StepConfig& cfg) {
  cfg.validate();
  ExistenceEstimate est;
  est.t_max = t_max;
  if (prob.state_norm(u0) > cfg.blowup_threshold) {
    est.blowup_time = t0;
    return est;
  }
  State u = u0;
  const long K = std::lround((t_max - t0) / cfg.dt);
  for (long k = 0; k < K; ++k) {
    u = step(prob, t0 + k * cfg.dt, u, cfg);
    if (prob.state_norm(u) > cfg.blowup_threshold) {
      est.blowup_time = t0 + (k + 1) * cfg.dt;
      return est;
    }
  }
  return est;
}

}  // namespace mrlab
