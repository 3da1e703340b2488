#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mrlab/norms.hpp"

namespace mrlab {

enum class RunStatus : std::uint8_t { completed, blowup };

/// Uniformly sampled evolution record: states[k] lives at t0 + k dt.  When
/// status == blowup the last retained state is the offending one and
/// blowup_time is its time stamp.
template <class State>
struct Trajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<State> states;
  RunStatus status = RunStatus::completed;
  double blowup_time = 0.0;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  double time(int k) const { return t0 + k * dt; }
  double t_end() const { return time(steps()); }
};

/// Left-endpoint time-L^p norm of per-state values v_k (k = 0..K-1 of K+1
/// states): (sum dt v_k^p)^{1/p}.
template <class State, class NormFn>
double trajectory_lp(const Trajectory<State>& tr, double p, NormFn&& norm) {
  if (tr.states.size() < 2)
    throw std::invalid_argument("trajectory norm: at least two states required");
  if (!(tr.dt > 0.0)) throw std::invalid_argument("trajectory norm: dt must be positive");
  double s = 0.0;
  const PowerP pp(p);
  for (int k = 0; k + 1 < static_cast<int>(tr.states.size()); ++k) s += pp(norm(tr.states[k]));
  return std::pow(tr.dt * s, 1.0 / p);
}

/// E0 = L^p(J; X0) realized with the left-endpoint rule.
template <class State, class N0>
double e0_norm_with(const Trajectory<State>& tr, double p, N0&& x0) {
  return trajectory_lp(tr, p, x0);
}

/// E1 = W^{1,p}(J; X0) \cap L^p(J; X1) realized as the sum of three
/// left-endpoint norms; the time derivative uses backward differences with a
/// forward difference for the first sample.
template <class State, class N0, class N1>
double e1_norm_with(const Trajectory<State>& tr, double p, N0&& x0, N1&& x1) {
  const double e0 = trajectory_lp(tr, p, x0);
  const double ex1 = trajectory_lp(tr, p, x1);
  double sder = 0.0;
  const PowerP pp(p);
  const int K = tr.steps();
  for (int k = 0; k < K; ++k) {
    const State& a = tr.states[k == 0 ? 1 : k];
    const State& b = tr.states[k == 0 ? 0 : k - 1];
    State d = a - b;
    sder += pp(x0(d) / tr.dt);
  }
  return e0 + std::pow(tr.dt * sder, 1.0 / p) + ex1;
}

/// sup_k xp(u_k) / (xp(u_0) + e1): the discrete trace embedding quotient.
template <class State, class N0, class N1, class Np>
double embedding_ratio_with(const Trajectory<State>& tr, double p, N0&& x0, N1&& x1, Np&& xp) {
  if (tr.states.empty()) throw std::invalid_argument("embedding_ratio: empty trajectory");
  double sup = 0.0;
  for (const State& s : tr.states) sup = std::max(sup, xp(s));
  const double den = xp(tr.states.front()) + e1_norm_with(tr, p, x0, x1);
  if (den == 0.0) throw std::invalid_argument("embedding_ratio: zero trajectory");
  return sup / den;
}

// Field-trajectory conveniences bound to the grid exponent.
inline double e0_norm(const Trajectory<Field>& tr) {
  return e0_norm_with(tr, tr.states.front().grid.p, [](const Field& u) { return x0_norm(u); });
}
inline double e1_norm(const Trajectory<Field>& tr) {
  return e1_norm_with(
      tr, tr.states.front().grid.p, [](const Field& u) { return x0_norm(u); },
      [](const Field& u) { return x1_norm(u); });
}
inline double embedding_ratio(const Trajectory<Field>& tr) {
  return embedding_ratio_with(
      tr, tr.states.front().grid.p, [](const Field& u) { return x0_norm(u); },
      [](const Field& u) { return x1_norm(u); }, [](const Field& u) { return xp_norm(u); });
}

/// State-wise difference a - b on a common time grid.  If a is coarser by an
/// integer factor it is interpolated linearly onto b's grid, so dt-refined
/// reference runs can be compared directly.
template <class State>
Trajectory<State> trajectory_difference(const Trajectory<State>& a, const Trajectory<State>& b) {
  if (a.dt < b.dt) return trajectory_difference(b, a);
  const double ratio = a.dt / b.dt;
  const int r = static_cast<int>(std::lround(ratio));
  if (std::fabs(ratio - r) > 1e-9 || r < 1)
    throw std::invalid_argument("trajectory_difference: dt values are not integer multiples");
  Trajectory<State> d;
  d.t0 = a.t0;
  d.dt = b.dt;
  d.status = RunStatus::completed;
  const int K = std::min<int>((static_cast<int>(a.states.size()) - 1) * r, static_cast<int>(b.states.size()) - 1);
  d.states.reserve(K + 1);
  for (int k = 0; k <= K; ++k) {
    const int q = k / r, rem = k % r;
    if (rem == 0) {
      d.states.push_back(a.states[q] - b.states[k]);
    } else {
      const double w = static_cast<double>(rem) / r;
      State interp = (1.0 - w) * a.states[q] + w * a.states[q + 1];
      d.states.push_back(interp - b.states[k]);
    }
  }
  return d;
}

}  // namespace mrlab
