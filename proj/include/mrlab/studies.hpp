#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mrlab/carreau.hpp"
#include "mrlab/evolution.hpp"
#include "mrlab/maxreg.hpp"
#include "mrlab/norms.hpp"
#include "mrlab/trajectory.hpp"

namespace mrlab {

// ---------------------------------------------------------------------------
// Shared small helpers.
// ---------------------------------------------------------------------------

/// Least-squares slope of log(y) against log(x) over points with x,y > 0.
/// Returns the number of points actually used through `used` (optional).
inline double fit_loglog_slope(const std::vector<std::pair<double, double>>& xy,
                               int* used = nullptr) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [x, y] : xy) {
    if (!(x > 0.0) || !(y > 0.0)) continue;
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (used) *used = n;
  if (n < 2) return 0.0;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return 0.0;
  return (n * sxy - sx * sy) / den;
}

/// The 2D vortex datum (cos x sin y, -sin x cos y) on the periodic box; its
/// face sampling is exactly divergence-free on the staggered grid.
inline Field taylor_green(const GridSpec& g) {
  if (g.dim != 2) throw std::invalid_argument("taylor_green: 2D grids only");
  Field v = Field::make(g, Role::velocity);
  v.sample([](const std::array<double, 3>& x, int c) {
    return c == 0 ? std::cos(x[0]) * std::sin(x[1]) : -std::sin(x[0]) * std::cos(x[1]);
  });
  return v;
}

/// Closed-form Newtonian evolution of the vortex: e^{-2 mu t} times the datum.
inline Field taylor_green_exact(const GridSpec& g, double mu, double t) {
  Field v = taylor_green(g);
  v *= std::exp(-2.0 * mu * t);
  return v;
}

/// One fluid integration plus the bookkeeping every study needs: the
/// trajectory starts from the prepared (boundary-consistent, projected) datum
/// and the worst recorded divergence is tracked.
struct FluidRun {
  Trajectory<Field> traj;
  double max_divergence = 0.0;
};

inline FluidRun integrate_fluid(const FluidProblemSpec& spec, double T, const StepConfig& step) {
  FluidRun run;
  const QuasilinearProblem<Field> prob = make_problem(spec);
  const Field v0 = prepared_initial(spec);
  run.traj = integrate(prob, v0, 0.0, T, step);
  for (const Field& s : run.traj.states)
    run.max_divergence = std::max(run.max_divergence, divergence_norm(s));
  return run;
}

// ---------------------------------------------------------------------------
// Manufactured-solution verification.
// ---------------------------------------------------------------------------

struct MmsConfig {
  double mu_inf = 1.0;
  double p = 5.0;
  std::vector<int> n_levels{16, 32, 64};
  double dt_base = 5e-3;  // time step at n_levels.front(), scaled with h^2
  double T_spatial = 0.1;
  int temporal_n = 64;
  std::vector<double> dt_levels{0.08, 0.04, 0.02};
  double T_temporal = 0.4;
  double spatial_threshold = 1.8;
  double temporal_threshold = 0.9;

  void validate() const {
    if (!(mu_inf > 0.0)) throw std::invalid_argument("MmsConfig: mu_inf must be positive");
    if (n_levels.size() < 2 || dt_levels.size() < 2)
      throw std::invalid_argument("MmsConfig: need at least two refinement levels");
    for (std::size_t i = 1; i < n_levels.size(); ++i)
      if (n_levels[i] <= n_levels[i - 1])
        throw std::invalid_argument("MmsConfig: n_levels must increase");
    for (std::size_t i = 1; i < dt_levels.size(); ++i)
      if (dt_levels[i] >= dt_levels[i - 1])
        throw std::invalid_argument("MmsConfig: dt_levels must decrease");
    if (!(T_spatial > 0.0) || !(T_temporal > 0.0) || temporal_n < 4)
      throw std::invalid_argument("MmsConfig: bad horizon or grid");
  }
};

struct MmsRow {
  int n = 0;
  double dt = 0.0;
  double error = 0.0;  // max over recorded times of |v_h(t) - v_exact(t)|_X0
};

struct MmsTable {
  std::vector<MmsRow> spatial, temporal;
  std::vector<double> spatial_ratios, temporal_ratios;
  double spatial_order = 0.0;
  double temporal_order = 0.0;
  double initial_error = 0.0;  // |prepared datum - exact(0)|_X0 at the finest level
  double max_divergence = 0.0;
  double spatial_threshold = 1.8, temporal_threshold = 0.9;
  bool pass = false;
};

/// Integrates the eta = 0 problem on the vortex datum and measures errors
/// against the closed-form decay, first across spatial levels (dt scaled as
/// h^2 so time error refines in lockstep) and then across dt halvings at a
/// fixed fine grid.
inline MmsTable run_mms_verification(const MmsConfig& cfg) {
  cfg.validate();
  MmsTable table;
  table.spatial_threshold = cfg.spatial_threshold;
  table.temporal_threshold = cfg.temporal_threshold;

  auto run_level = [&](int n, double dt, double T) {
    const GridSpec g = periodic_box(2, n, 2.0 * M_PI, cfg.p);
    FluidProblemSpec spec;
    spec.grid = g;
    spec.law = ViscosityLaw{cfg.mu_inf, 0.0, 0.0, 1.0};
    spec.initial = taylor_green(g);
    StepConfig step;
    step.dt = dt;
    const FluidRun run = integrate_fluid(spec, T, step);
    table.max_divergence = std::max(table.max_divergence, run.max_divergence);
    double err = 0.0;
    for (std::size_t k = 0; k < run.traj.states.size(); ++k) {
      const double t = run.traj.t0 + static_cast<double>(k) * run.traj.dt;
      err = std::max(err, x0_norm(run.traj.states[k] - taylor_green_exact(g, cfg.mu_inf, t)));
      if (k == 0 && n == cfg.n_levels.back())
        table.initial_error = x0_norm(run.traj.states[0] - taylor_green_exact(g, cfg.mu_inf, 0.0));
    }
    return err;
  };

  std::vector<std::pair<double, double>> sp_fit, tm_fit;
  const int n0 = cfg.n_levels.front();
  for (int n : cfg.n_levels) {
    const double scale = static_cast<double>(n0) / n;
    const double dt = cfg.dt_base * scale * scale;
    const double err = run_level(n, dt, cfg.T_spatial);
    table.spatial.push_back({n, dt, err});
    sp_fit.push_back({2.0 * M_PI / n, err});
  }
  for (double dt : cfg.dt_levels) {
    const double err = run_level(cfg.temporal_n, dt, cfg.T_temporal);
    table.temporal.push_back({cfg.temporal_n, dt, err});
    tm_fit.push_back({dt, err});
  }
  for (std::size_t i = 1; i < table.spatial.size(); ++i)
    table.spatial_ratios.push_back(table.spatial[i - 1].error / table.spatial[i].error);
  for (std::size_t i = 1; i < table.temporal.size(); ++i)
    table.temporal_ratios.push_back(table.temporal[i - 1].error / table.temporal[i].error);
  table.spatial_order = fit_loglog_slope(sp_fit);
  table.temporal_order = fit_loglog_slope(tm_fit);
  table.pass = table.spatial_order >= cfg.spatial_threshold &&
               table.temporal_order >= cfg.temporal_threshold;
  return table;
}

// ---------------------------------------------------------------------------
// Viscosity-limit / data-perturbation study.
// ---------------------------------------------------------------------------

struct LimitStudyConfig {
  FluidProblemSpec base;            // grid, law (eta overridden per row), unperturbed datum
  std::vector<double> eta_sequence; // non-increasing, non-negative; one row per entry
  std::vector<double> data_deltas;  // per-row datum offsets (empty means all zero)
  Field perturbation;               // offset shape w; row datum is v0 + delta_n * w
  double T_K = 0.5;                 // observation interval [0, T_K]
  StepConfig step;
  unsigned long long seed = 1;      // probe ensemble for the operator/forcing gaps
  int op_probes = 3;
  std::string report_path;

  void validate() const {
    base.validate();
    step.validate();
    if (eta_sequence.empty()) throw std::invalid_argument("LimitStudyConfig: empty eta sequence");
    for (std::size_t i = 0; i < eta_sequence.size(); ++i) {
      if (eta_sequence[i] < 0.0)
        throw std::invalid_argument("LimitStudyConfig: eta values must be non-negative");
      if (i > 0 && eta_sequence[i] > eta_sequence[i - 1])
        throw std::invalid_argument("LimitStudyConfig: eta sequence must be non-increasing");
    }
    if (!data_deltas.empty() && data_deltas.size() != eta_sequence.size())
      throw std::invalid_argument("LimitStudyConfig: data_deltas length mismatch");
    bool any_delta = false;
    for (double d : data_deltas) {
      if (d < 0.0) throw std::invalid_argument("LimitStudyConfig: deltas must be non-negative");
      any_delta = any_delta || d > 0.0;
    }
    if (any_delta) {
      if (perturbation.comps.empty() || perturbation.role != Role::velocity ||
          !detail::same_grid(perturbation.grid, base.grid))
        throw std::invalid_argument(
            "LimitStudyConfig: non-zero deltas need a velocity perturbation on the study grid");
    }
    if (!(T_K > 0.0)) throw std::invalid_argument("LimitStudyConfig: T_K must be positive");
    const double kf = T_K / step.dt;
    if (std::fabs(kf - std::lround(kf)) > 1e-9 * std::max(1.0, kf))
      throw std::invalid_argument("LimitStudyConfig: T_K must be a multiple of dt");
    if (op_probes < 1) throw std::invalid_argument("LimitStudyConfig: op_probes must be >= 1");
  }
};

struct ConvergenceRow {
  int n = 0;
  double eta_n = 0.0;
  double data_gap = 0.0;      // |v0_n - v0_ref|_Xp of the prepared data
  double e1_gap = 0.0;        // |v_n - v_ref|_E1(K)
  double sup_gap = 0.0;       // sup_t |v_n(t) - v_ref(t)|_Xp
  double pressure_gap = 0.0;  // |grad p_n - grad p_ref|_E0(K)
  double op_gap = 0.0;        // sampled operator distance between the two laws
  double f_gap = 0.0;         // sampled forcing distance between the two laws
  bool blew_up = false;
  bool at_floor = false;      // e1_gap <= 3 x discretization floor
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double floor_estimate = 0.0;  // e1 norm of (dt vs dt/2) reference discrepancy
  double slope = 0.0;           // log-log slope of e1_gap vs (eta_n + data_gap)
  int fitted_rows = 0;          // rows entering the slope fit
  bool monotone_to_floor = true;  // e1_gap non-increasing while above the floor
  bool strict_to_floor = true;    // strictly decreasing while above the floor
  double pressure_c = 0.0;        // fitted c in pressure_gap <= c (e1+op+f)
  bool pressure_dominated = true;
  double max_divergence = 0.0;    // worst divergence over every recorded state
};

/// Integrates the eta = 0 reference and one run per (eta_n, delta_n) row with
/// identical grid and dt, then tabulates every gap column.  Rows that blow up
/// before T_K keep their data/op/f gaps, carry infinite trajectory gaps, and
/// are excluded from the slope fit and the monotonicity verdicts.
inline ConvergenceTable run_limit_study(const LimitStudyConfig& cfg) {
  cfg.validate();
  ConvergenceTable table;

  FluidProblemSpec ref_spec = cfg.base;
  ref_spec.law.eta = 0.0;
  const FluidRun ref = integrate_fluid(ref_spec, cfg.T_K, cfg.step);
  table.max_divergence = std::max(table.max_divergence, ref.max_divergence);
  if (ref.traj.status == RunStatus::blowup)
    throw std::runtime_error("run_limit_study: reference run blew up on the observation interval");

  StepConfig half = cfg.step;
  half.dt *= 0.5;
  const FluidRun ref_half = integrate_fluid(ref_spec, cfg.T_K, half);
  table.max_divergence = std::max(table.max_divergence, ref_half.max_divergence);
  if (ref_half.traj.status == RunStatus::blowup)
    throw std::runtime_error("run_limit_study: dt-halved reference blew up");
  table.floor_estimate = e1_norm(trajectory_difference(ref.traj, ref_half.traj));

  std::vector<OperatorProbe> probes;
  for (int i = 0; i < cfg.op_probes; ++i)
    probes.push_back({random_smooth_field(cfg.base.grid, mix_seed(cfg.seed, 2 * i)),
                      random_smooth_field(cfg.base.grid, mix_seed(cfg.seed, 2 * i + 1))});

  std::vector<Field> ref_press;
  ref_press.reserve(ref.traj.states.size());
  for (const Field& s : ref.traj.states) ref_press.push_back(pressure_witness(ref_spec.law, s));

  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < cfg.eta_sequence.size(); ++n) {
    ConvergenceRow row;
    row.n = static_cast<int>(n);
    row.eta_n = cfg.eta_sequence[n];

    FluidProblemSpec spec = cfg.base;
    spec.law.eta = row.eta_n;
    const double delta = cfg.data_deltas.empty() ? 0.0 : cfg.data_deltas[n];
    if (delta != 0.0) spec.initial = cfg.base.initial + delta * cfg.perturbation;

    const FluidRun run = integrate_fluid(spec, cfg.T_K, cfg.step);
    table.max_divergence = std::max(table.max_divergence, run.max_divergence);
    row.blew_up = run.traj.status == RunStatus::blowup;
    row.data_gap = xp_norm(run.traj.states.front() - ref.traj.states.front());
    row.op_gap = operator_distance(spec.law, ref_spec.law, probes);
    for (const auto& pr : probes)
      row.f_gap = std::max(row.f_gap, x0_norm(convective_f(spec.law, pr.u) -
                                              convective_f(ref_spec.law, pr.u)));

    if (!row.blew_up) {
      const Trajectory<Field> diff = trajectory_difference(run.traj, ref.traj);
      row.e1_gap = e1_norm(diff);
      for (const Field& s : diff.states) row.sup_gap = std::max(row.sup_gap, xp_norm(s));
      Trajectory<Field> press_diff;
      press_diff.t0 = run.traj.t0;
      press_diff.dt = run.traj.dt;
      for (std::size_t k = 0; k < run.traj.states.size(); ++k)
        press_diff.states.push_back(pressure_witness(spec.law, run.traj.states[k]) -
                                    ref_press[k]);
      row.pressure_gap = e0_norm(press_diff);
      row.at_floor = row.e1_gap <= 3.0 * table.floor_estimate;
    } else {
      row.e1_gap = row.sup_gap = row.pressure_gap = inf;
    }
    table.rows.push_back(row);
  }

  // Monotonicity verdicts over consecutive surviving rows; rows at or below
  // the floor are exempt from the decrease requirement.
  const ConvergenceRow* prev = nullptr;
  for (const ConvergenceRow& row : table.rows) {
    if (row.blew_up) continue;
    if (prev && !row.at_floor) {
      if (row.e1_gap > prev->e1_gap) table.monotone_to_floor = false;
      if (!(row.e1_gap < prev->e1_gap)) table.strict_to_floor = false;
    }
    prev = &row;
  }

  std::vector<std::pair<double, double>> fit;
  for (const ConvergenceRow& row : table.rows) {
    if (row.blew_up || row.at_floor) continue;
    fit.push_back({row.eta_n + row.data_gap, row.e1_gap});
  }
  table.slope = fit_loglog_slope(fit, &table.fitted_rows);

  for (const ConvergenceRow& row : table.rows) {
    if (row.blew_up) continue;
    const double den = row.e1_gap + row.op_gap + row.f_gap;
    if (den > 0.0)
      table.pressure_c = std::max(table.pressure_c, row.pressure_gap / den);
    else if (row.pressure_gap > 0.0)
      table.pressure_dominated = false;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Abstract dependence study on matrix-scale quasilinear systems.
// ---------------------------------------------------------------------------

/// Family u' + A(delta, u) u = f(delta, u), u(0) = u0(delta); delta = 0 is
/// the limit problem and positive deltas are its perturbations.
struct DependenceConfig {
  int dimension = 1;
  double p = 2.0;
  double T_K = 0.5;
  StepConfig step;
  std::vector<double> delta_grid;  // positive drivers, typically decreasing
  std::function<Eigen::MatrixXd(double delta, const Eigen::VectorXd& u)> A;
  std::function<Eigen::VectorXd(double delta, const Eigen::VectorXd& u)> f;
  std::function<Eigen::VectorXd(double delta)> u0;
  double declared_lipschitz_A = 0.0;  // 0 disables the sampling check
  double declared_lipschitz_f = 0.0;
  int lipschitz_samples = 64;
  double sample_radius = 1.0;
  unsigned long long seed = 1;

  void validate() const {
    step.validate();
    if (dimension < 1) throw std::invalid_argument("DependenceConfig: dimension must be >= 1");
    if (!(p >= 1.0)) throw std::invalid_argument("DependenceConfig: p must be >= 1");
    if (!(T_K > 0.0)) throw std::invalid_argument("DependenceConfig: T_K must be positive");
    if (delta_grid.empty()) throw std::invalid_argument("DependenceConfig: empty delta grid");
    if (!A || !f || !u0) throw std::invalid_argument("DependenceConfig: family incomplete");
  }
};

struct DependenceRow {
  double delta = 0.0;
  double data_gap = 0.0;  // |u0(delta) - u0(0)|_p
  double op_gap = 0.0;    // sup over sampled states of |A(delta,u) - A(0,u)|_2
  double f_gap = 0.0;     // sup over sampled states of |f(delta,u) - f(0,u)|_p
  double e1_gap = 0.0;    // |phi_delta - phi_0|_E1(K)
  double driver_sum = 0.0;
  double ratio = 0.0;     // e1_gap / driver_sum (0 when driver_sum = 0)
  bool blew_up = false;
};

struct DependenceTable {
  std::vector<DependenceRow> rows;
  double fitted_c = 0.0;  // max ratio over rows with a positive driver
  double slope = 0.0;     // log-log slope of e1_gap vs driver_sum
  int fitted_rows = 0;
  bool gap_vanishes = true;  // e1 gaps shrink with the drivers (or are all 0)
  double sampled_lipschitz_A = 0.0;
  double sampled_lipschitz_f = 0.0;
};

namespace detail {

inline QuasilinearProblem<Eigen::VectorXd> dependence_problem(const DependenceConfig& cfg,
                                                              double delta) {
  QuasilinearProblem<Eigen::VectorXd> prob;
  const double p = cfg.p;
  const int m = cfg.dimension;
  auto afn = cfg.A;
  auto ffn = cfg.f;
  prob.apply_A = [afn, delta](double, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return Eigen::VectorXd(afn(delta, u) * v);
  };
  prob.solve_shifted = [afn, delta, m](double, const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& rhs, double tau) {
    const Eigen::MatrixXd shifted =
        Eigen::MatrixXd::Identity(m, m) + tau * afn(delta, u);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(shifted);
    if (!lu.isInvertible()) throw SolverError("dependence step: I + tau*A is singular", 0.0);
    return Eigen::VectorXd(lu.solve(rhs));
  };
  prob.eval_f = [ffn, delta](double, const Eigen::VectorXd& u) {
    return Eigen::VectorXd(ffn(delta, u));
  };
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(m);
  prob.state_norm = [w, p](const Eigen::VectorXd& u) { return weighted_lp(u, w, p); };
  return prob;
}

inline double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.rows() == 1 && a.cols() == 1) return std::fabs(a(0, 0));
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
}

}  // namespace detail

/// Runs the limit problem (delta = 0) and each perturbed problem, tabulating
/// the solution gap in E1 against the three drivers.  Before any run, the
/// declared Lipschitz bounds of the family are spot-checked on seeded sample
/// pairs; a sampled modulus more than 10% above a declared bound aborts with
/// AssumptionError.
inline DependenceTable run_dependence_study(const DependenceConfig& cfg) {
  cfg.validate();
  const int m = cfg.dimension;
  DependenceTable table;

  // Hypothesis sampling on [-R, R]^m for every delta in the study.
  {
    std::mt19937_64 rng(mix_seed(cfg.seed, 0x11bull));
    std::uniform_real_distribution<double> unif(-cfg.sample_radius, cfg.sample_radius);
    std::vector<double> deltas = cfg.delta_grid;
    deltas.push_back(0.0);
    for (int s = 0; s < cfg.lipschitz_samples; ++s) {
      Eigen::VectorXd u1(m), u2(m);
      for (int i = 0; i < m; ++i) {
        u1[i] = unif(rng);
        u2[i] = unif(rng);
      }
      const double du = (u1 - u2).norm();
      if (du == 0.0) continue;
      for (double d : deltas) {
        table.sampled_lipschitz_A = std::max(
            table.sampled_lipschitz_A, detail::spectral_norm(cfg.A(d, u1) - cfg.A(d, u2)) / du);
        table.sampled_lipschitz_f =
            std::max(table.sampled_lipschitz_f, (cfg.f(d, u1) - cfg.f(d, u2)).norm() / du);
      }
    }
    if (cfg.declared_lipschitz_A > 0.0 &&
        table.sampled_lipschitz_A > 1.1 * cfg.declared_lipschitz_A)
      throw AssumptionError("run_dependence_study: sampled operator Lipschitz modulus " +
                            std::to_string(table.sampled_lipschitz_A) +
                            " exceeds the declared bound by more than 10%");
    if (cfg.declared_lipschitz_f > 0.0 &&
        table.sampled_lipschitz_f > 1.1 * cfg.declared_lipschitz_f)
      throw AssumptionError("run_dependence_study: sampled forcing Lipschitz modulus " +
                            std::to_string(table.sampled_lipschitz_f) +
                            " exceeds the declared bound by more than 10%");
  }

  const auto prob0 = detail::dependence_problem(cfg, 0.0);
  const Trajectory<Eigen::VectorXd> ref =
      integrate(prob0, Eigen::VectorXd(cfg.u0(0.0)), 0.0, cfg.T_K, cfg.step);
  if (ref.status == RunStatus::blowup)
    throw std::runtime_error("run_dependence_study: limit problem blew up on [0, T_K]");

  // States on which the operator/forcing gaps are sampled: the limit
  // trajectory (subsampled) plus each row's datum.
  std::vector<Eigen::VectorXd> sample_states;
  {
    const std::size_t stride = std::max<std::size_t>(1, ref.states.size() / 32);
    for (std::size_t k = 0; k < ref.states.size(); k += stride) sample_states.push_back(ref.states[k]);
  }

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  auto lp = [&](const Eigen::VectorXd& u) { return weighted_lp(u, ones, cfg.p); };

  std::vector<std::pair<double, double>> fit;
  for (double delta : cfg.delta_grid) {
    DependenceRow row;
    row.delta = delta;
    row.data_gap = lp(cfg.u0(delta) - cfg.u0(0.0));
    for (const auto& u : sample_states) {
      row.op_gap = std::max(row.op_gap, detail::spectral_norm(cfg.A(delta, u) - cfg.A(0.0, u)));
      row.f_gap = std::max(row.f_gap, lp(cfg.f(delta, u) - cfg.f(0.0, u)));
    }
    {
      const Eigen::VectorXd u = cfg.u0(delta);
      row.op_gap = std::max(row.op_gap, detail::spectral_norm(cfg.A(delta, u) - cfg.A(0.0, u)));
      row.f_gap = std::max(row.f_gap, lp(cfg.f(delta, u) - cfg.f(0.0, u)));
    }
    row.driver_sum = row.data_gap + row.op_gap + row.f_gap;

    const auto prob = detail::dependence_problem(cfg, delta);
    const Trajectory<Eigen::VectorXd> run =
        integrate(prob, Eigen::VectorXd(cfg.u0(delta)), 0.0, cfg.T_K, cfg.step);
    row.blew_up = run.status == RunStatus::blowup;
    if (!row.blew_up) {
      const auto diff = trajectory_difference(run, ref);
      row.e1_gap = e1_norm_with(diff, cfg.p, lp, lp);
      row.ratio = row.driver_sum > 0.0 ? row.e1_gap / row.driver_sum : 0.0;
      table.fitted_c = std::max(table.fitted_c, row.ratio);
      fit.push_back({row.driver_sum, row.e1_gap});
    } else {
      row.e1_gap = std::numeric_limits<double>::infinity();
    }
    table.rows.push_back(row);
  }
  table.slope = fit_loglog_slope(fit, &table.fitted_rows);

  double first_gap = -1.0, last_gap = -1.0;
  for (const auto& row : table.rows) {
    if (row.blew_up) continue;
    if (first_gap < 0.0) first_gap = row.e1_gap;
    last_gap = row.e1_gap;
  }
  if (first_gap > 0.0) table.gap_vanishes = last_gap <= 0.5 * first_gap;
  return table;
}

// ---------------------------------------------------------------------------
// Blow-up time study.
// ---------------------------------------------------------------------------

struct BlowupConfig {
  QuasilinearProblem<Eigen::VectorXd> problem;
  std::vector<double> labels;                // sequence index n per datum
  std::vector<Eigen::VectorXd> u0_sequence;  // u0_n -> u0_limit
  Eigen::VectorXd u0_limit;
  double t_max = 2.0;
  StepConfig step;
  int tail = 0;  // rows counted as the tail; 0 means the trailing half

  void validate() const {
    step.validate();
    if (!problem.apply_A || !problem.solve_shifted || !problem.eval_f || !problem.state_norm)
      throw std::invalid_argument("BlowupConfig: problem incomplete");
    if (u0_sequence.empty()) throw std::invalid_argument("BlowupConfig: empty datum sequence");
    if (!labels.empty() && labels.size() != u0_sequence.size())
      throw std::invalid_argument("BlowupConfig: labels length mismatch");
    if (u0_limit.size() == 0) throw std::invalid_argument("BlowupConfig: missing limit datum");
    if (!(t_max > 0.0)) throw std::invalid_argument("BlowupConfig: t_max must be positive");
  }
};

struct BlowupRow {
  double n = 0.0;
  double u0_norm = 0.0;
  double T_n = 0.0;  // blow-up estimate; t_max when the run survived
  bool blew_up = false;
};

struct BlowupTable {
  std::vector<BlowupRow> rows;
  double T_limit = 0.0;
  bool limit_blew_up = false;
  double tail_max = 0.0;       // max T_n over blown-up rows in the tail
  double dt = 0.0;
  bool inequality_ok = true;   // T_limit <= tail_max + 2 dt when decidable
  bool inconclusive = false;   // nothing blew up before t_max
};

/// Estimates the existence time of every sequence member and of the limit
/// datum, then checks the limsup inequality against the trailing portion of
/// the sequence.  If no run crosses the threshold before t_max the study is
/// flagged inconclusive rather than failed.
inline BlowupTable run_blowup_study(const BlowupConfig& cfg) {
  cfg.validate();
  BlowupTable table;
  table.dt = cfg.step.dt;

  for (std::size_t i = 0; i < cfg.u0_sequence.size(); ++i) {
    BlowupRow row;
    row.n = cfg.labels.empty() ? static_cast<double>(i) : cfg.labels[i];
    row.u0_norm = cfg.problem.state_norm(cfg.u0_sequence[i]);
    const ExistenceEstimate est =
        estimate_existence_time(cfg.problem, cfg.u0_sequence[i], 0.0, cfg.t_max, cfg.step);
    row.blew_up = est.blew_up();
    row.T_n = row.blew_up ? *est.blowup_time : cfg.t_max;
    table.rows.push_back(row);
  }
  {
    const ExistenceEstimate est =
        estimate_existence_time(cfg.problem, cfg.u0_limit, 0.0, cfg.t_max, cfg.step);
    table.limit_blew_up = est.blew_up();
    table.T_limit = table.limit_blew_up ? *est.blowup_time : cfg.t_max;
  }

  const int rows = static_cast<int>(table.rows.size());
  const int tail = cfg.tail > 0 ? std::min(cfg.tail, rows) : (rows + 1) / 2;
  bool tail_has_blowup = false;
  for (int i = rows - tail; i < rows; ++i) {
    if (!table.rows[i].blew_up) continue;
    tail_has_blowup = true;
    table.tail_max = std::max(table.tail_max, table.rows[i].T_n);
  }

  bool any_blowup = table.limit_blew_up;
  for (const auto& row : table.rows) any_blowup = any_blowup || row.blew_up;
  table.inconclusive = !any_blowup;

  if (table.inconclusive) {
    table.inequality_ok = true;  // vacuous: no finite time on either side
  } else if (!table.limit_blew_up) {
    // Limit survived the horizon while some member blew up: the inequality
    // can only be confirmed if even the horizon end obeys the tail bound.
    table.inequality_ok = tail_has_blowup && cfg.t_max <= table.tail_max + 2.0 * cfg.step.dt;
  } else {
    table.inequality_ok = tail_has_blowup && table.T_limit <= table.tail_max + 2.0 * cfg.step.dt;
  }
  return table;
}

/// The scalar model u' = u^2 written in quasilinear form A(u) = -u, f = 0;
/// used by the blow-up studies and their oracles.
inline QuasilinearProblem<Eigen::VectorXd> riccati_problem() {
  QuasilinearProblem<Eigen::VectorXd> prob;
  prob.apply_A = [](double, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return Eigen::VectorXd(-u[0] * v);
  };
  prob.solve_shifted = [](double, const Eigen::VectorXd& u, const Eigen::VectorXd& rhs,
                          double tau) {
    const double denom = 1.0 - tau * u[0];
    if (denom == 0.0) throw SolverError("riccati step: singular shift", 0.0);
    return Eigen::VectorXd(rhs / denom);
  };
  prob.eval_f = [](double, const Eigen::VectorXd& u) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(u.size()));
  };
  prob.state_norm = [](const Eigen::VectorXd& u) { return std::fabs(u[0]); };
  return prob;
}

}  // namespace mrlab
