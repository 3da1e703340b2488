// Command-line driver for the desk-scale study runners.
//
// Subcommands: mms, limit, depend, blowup, maxreg.  Each reads a key = value
// config file, runs the corresponding study, writes <out>.csv and <out>.json
// (rows, summary, config echo, content hash, verdicts), prints one PASS/FAIL
// line per asserted property, and exits 0 iff every assertion passed.

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrlab/config.hpp"
#include "mrlab/report.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  long long seed = -1;  // negative: defer to the config file
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_path, "output stem; writes <out>.csv and <out>.json")
      ->required();
  cmd->add_option("--seed", args.seed, "seed override (defaults to the config's `seed`)");
  cmd->add_option("--threads", args.threads,
                  "worker threads; recorded in the report (runners are single-threaded)");
}

unsigned long long resolve_seed(const mrlab::Config& cfg, const CommonArgs& args) {
  if (args.seed >= 0) return static_cast<unsigned long long>(args.seed);
  return static_cast<unsigned long long>(cfg.get_int("seed", 1));
}

int finish(const mrlab::StudyReport& report, const mrlab::Config& cfg,
           unsigned long long seed, const CommonArgs& args) {
  const mrlab::ReportPaths paths =
      mrlab::write_report(report, cfg, seed, std::max(1, args.threads), args.out_path);
  std::cout << "[" << report.kind << "] wrote " << paths.csv_path << " and " << paths.json_path
            << " (content " << paths.content_hash.substr(0, 12) << ")\n";
  for (const auto& [name, ok] : report.verdicts)
    std::cout << "[" << report.kind << "] " << name << ": " << (ok ? "PASS" : "FAIL") << "\n";
  std::cout << "[" << report.kind << "] overall: " << (paths.pass ? "PASS" : "FAIL") << "\n";
  return paths.pass ? 0 : 1;
}

std::vector<int> to_ints(const std::vector<long long>& v) {
  std::vector<int> out;
  for (long long x : v) out.push_back(static_cast<int>(x));
  return out;
}

// ---------------------------------------------------------------------------
// mms: Taylor-Green manufactured-solution convergence orders.
// ---------------------------------------------------------------------------
int run_mms(const CommonArgs& args) {
  const mrlab::Config cfg = mrlab::Config::from_file(args.config_path);
  cfg.require_known({"mu_inf", "p", "n_levels", "dt_base", "T_spatial", "temporal_n", "dt_levels",
                     "T_temporal", "spatial_threshold", "temporal_threshold", "div_tol", "seed"});
  mrlab::MmsConfig mc;
  mc.mu_inf = cfg.get_double("mu_inf", mc.mu_inf);
  mc.p = cfg.get_double("p", mc.p);
  if (cfg.has("n_levels")) mc.n_levels = to_ints(cfg.get_ints("n_levels"));
  mc.dt_base = cfg.get_double("dt_base", mc.dt_base);
  mc.T_spatial = cfg.get_double("T_spatial", mc.T_spatial);
  mc.temporal_n = static_cast<int>(cfg.get_int("temporal_n", mc.temporal_n));
  if (cfg.has("dt_levels")) mc.dt_levels = cfg.get_doubles("dt_levels");
  mc.T_temporal = cfg.get_double("T_temporal", mc.T_temporal);
  mc.spatial_threshold = cfg.get_double("spatial_threshold", mc.spatial_threshold);
  mc.temporal_threshold = cfg.get_double("temporal_threshold", mc.temporal_threshold);

  const mrlab::MmsTable table = mrlab::run_mms_verification(mc);
  const mrlab::StudyReport report = mrlab::report_of(table, cfg.get_double("div_tol", 1e-9));
  return finish(report, cfg, resolve_seed(cfg, args), args);
}

// ---------------------------------------------------------------------------
// limit: vanishing shear-dependent viscosity / perturbed-datum fluid study.
// ---------------------------------------------------------------------------
int run_limit(const CommonArgs& args) {
  const mrlab::Config cfg = mrlab::Config::from_file(args.config_path);
  cfg.require_known({"dim",  "n",       "p",          "length",        "mu_inf",
                     "alpha", "rho",    "eta_sequence", "data_deltas", "perturbation_seed",
                     "perturbation_modes", "T_K",     "dt",            "picard_iters",
                     "blowup_threshold", "projection_tol", "solver_tol", "op_probes",
                     "seed",  "div_tol", "slope_min", "slope_max",     "assert_slope"});
  const int dim = static_cast<int>(cfg.get_int("dim", 2));
  const int n = static_cast<int>(cfg.get_int("n", 32));
  const double p = cfg.get_double("p", dim == 2 ? 5.0 : 6.0);
  const double length = cfg.get_double("length", 2.0 * M_PI);

  mrlab::LimitStudyConfig lc;
  lc.base.grid = mrlab::periodic_box(dim, n, length, p);
  lc.base.law = mrlab::ViscosityLaw{cfg.get_double("mu_inf", 1.0), 0.0,
                                    cfg.get_double("alpha", (dim - 2) / 2.0),
                                    cfg.get_double("rho", 1.0)};
  lc.base.initial = mrlab::taylor_green(lc.base.grid);
  lc.base.projection_tol = cfg.get_double("projection_tol", 1e-10);
  lc.base.solver_tol = cfg.get_double("solver_tol", 1e-10);
  lc.eta_sequence = cfg.get_doubles("eta_sequence");
  lc.data_deltas = cfg.get_doubles("data_deltas", {});
  bool perturbed = false;
  for (double d : lc.data_deltas) perturbed = perturbed || d != 0.0;
  if (perturbed)
    lc.perturbation = mrlab::random_smooth_field(
        lc.base.grid, static_cast<unsigned long long>(cfg.get_int("perturbation_seed", 2024)),
        static_cast<int>(cfg.get_int("perturbation_modes", 3)));
  lc.T_K = cfg.get_double("T_K", 0.5);
  lc.step.dt = cfg.get_double("dt", 1e-2);
  lc.step.picard_iters = static_cast<int>(cfg.get_int("picard_iters", lc.step.picard_iters));
  lc.step.blowup_threshold = cfg.get_double("blowup_threshold", lc.step.blowup_threshold);
  lc.op_probes = static_cast<int>(cfg.get_int("op_probes", lc.op_probes));
  lc.seed = resolve_seed(cfg, args);

  const mrlab::ConvergenceTable table = mrlab::run_limit_study(lc);
  const mrlab::StudyReport report =
      mrlab::report_of(table, cfg.get_bool("assert_slope", true), cfg.get_double("slope_min", 0.8),
                       cfg.get_double("slope_max", 1.2), cfg.get_double("div_tol", 1e-9));
  return finish(report, cfg, lc.seed, args);
}

// ---------------------------------------------------------------------------
// depend: scalar quasilinear continuous-dependence study.
// The packaged family is A(delta, u) = a0 + a_uu u^2 + delta*op_coupling,
// f(delta) = f0 + delta*f_coupling, u0(delta) = u0_base + delta*data_coupling.
// ---------------------------------------------------------------------------
int run_depend(const CommonArgs& args) {
  const mrlab::Config cfg = mrlab::Config::from_file(args.config_path);
  cfg.require_known({"p", "T_K", "dt", "picard_iters", "blowup_threshold", "delta_grid", "a0",
                     "a_uu", "op_coupling", "u0_base", "data_coupling", "f0", "f_coupling",
                     "declared_lipschitz_A", "declared_lipschitz_f", "lipschitz_samples",
                     "sample_radius", "ratio_band", "seed"});
  mrlab::DependenceConfig dc;
  dc.dimension = 1;
  dc.p = cfg.get_double("p", dc.p);
  dc.T_K = cfg.get_double("T_K", dc.T_K);
  dc.step.dt = cfg.get_double("dt", 1e-3);
  dc.step.picard_iters = static_cast<int>(cfg.get_int("picard_iters", dc.step.picard_iters));
  dc.step.blowup_threshold = cfg.get_double("blowup_threshold", dc.step.blowup_threshold);
  dc.delta_grid = cfg.get_doubles("delta_grid");

  const double a0 = cfg.get_double("a0", 1.0);
  const double a_uu = cfg.get_double("a_uu", 1.0);
  const double opc = cfg.get_double("op_coupling", 0.0);
  const double u0b = cfg.get_double("u0_base", 0.5);
  const double datac = cfg.get_double("data_coupling", 1.0);
  const double f0 = cfg.get_double("f0", 0.0);
  const double fc = cfg.get_double("f_coupling", 0.0);
  dc.A = [=](double delta, const Eigen::VectorXd& u) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = a0 + a_uu * u[0] * u[0] + delta * opc;
    return m;
  };
  dc.f = [=](double delta, const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::VectorXd::Constant(1, f0 + delta * fc));
  };
  dc.u0 = [=](double delta) {
    return Eigen::VectorXd(Eigen::VectorXd::Constant(1, u0b + delta * datac));
  };
  dc.declared_lipschitz_A = cfg.get_double("declared_lipschitz_A", 0.0);
  dc.declared_lipschitz_f = cfg.get_double("declared_lipschitz_f", 0.0);
  dc.lipschitz_samples = static_cast<int>(cfg.get_int("lipschitz_samples", dc.lipschitz_samples));
  dc.sample_radius = cfg.get_double("sample_radius", dc.sample_radius);
  dc.seed = resolve_seed(cfg, args);

  const mrlab::DependenceTable table = mrlab::run_dependence_study(dc);
  const mrlab::StudyReport report = mrlab::report_of(table, cfg.get_double("ratio_band", 2.0));
  return finish(report, cfg, dc.seed, args);
}

// ---------------------------------------------------------------------------
// blowup: existence-time comparison for u' = u^2 with data u0_limit + 1/n.
// ---------------------------------------------------------------------------
int run_blowup(const CommonArgs& args) {
  const mrlab::Config cfg = mrlab::Config::from_file(args.config_path);
  cfg.require_known({"u0_limit", "n_values", "t_max", "dt", "blowup_threshold", "tail",
                     "closed_form_tol", "seed"});
  mrlab::BlowupConfig bc;
  bc.problem = mrlab::riccati_problem();
  const double u0_limit = cfg.get_double("u0_limit", 1.0);
  bc.u0_limit = Eigen::VectorXd::Constant(1, u0_limit);
  std::vector<double> n_values = cfg.get_doubles("n_values", {1, 2, 4, 8, 16, 32, 64, 128});
  for (double n : n_values) {
    bc.labels.push_back(n);
    bc.u0_sequence.push_back(Eigen::VectorXd::Constant(1, u0_limit + 1.0 / n));
  }
  bc.t_max = cfg.get_double("t_max", 2.0);
  bc.step.dt = cfg.get_double("dt", 1e-4);
  // The implicit scheme tracks 1/u exactly, so the iterate overshoots any
  // threshold above 1/dt in a single step; keep the default detector well
  // below that scale.
  bc.step.blowup_threshold = cfg.get_double("blowup_threshold", 1e3);
  bc.tail = static_cast<int>(cfg.get_int("tail", 0));

  const mrlab::BlowupTable table = mrlab::run_blowup_study(bc);
  mrlab::StudyReport report = mrlab::report_of(table);

  const double tol = cfg.get_double("closed_form_tol", 5e-3);
  if (tol > 0.0) {
    // For u' = u^2 the exact existence time from datum u0 > 0 is 1/u0.
    double worst = 0.0;
    bool ok = true;
    for (const auto& row : table.rows) {
      if (!row.blew_up) continue;
      const double dev = std::abs(row.T_n - 1.0 / row.u0_norm);
      worst = std::max(worst, dev);
      ok = ok && dev <= tol;
    }
    if (table.limit_blew_up) {
      const double dev = std::abs(table.T_limit - 1.0 / u0_limit);
      worst = std::max(worst, dev);
      ok = ok && dev <= tol;
    }
    report.summary["closed_form_tol"] = tol;
    report.summary["closed_form_worst_dev"] = mrlab::json_real(worst);
    report.verdict("closed_form_ok", ok);
  }
  return finish(report, cfg, resolve_seed(cfg, args), args);
}

// ---------------------------------------------------------------------------
// maxreg: maximal-regularity constant scans.
//   scan = interval: scalar operator `a`, nested intervals T_grid.
//   scan = family:   scalar family a0 + a_t t + a_u u + a_uu u^2 over a
//                    (t, u) parameter path.
// ---------------------------------------------------------------------------
int run_maxreg(const CommonArgs& args) {
  const mrlab::Config cfg = mrlab::Config::from_file(args.config_path);
  cfg.require_known({"scan", "a", "T_grid", "p", "dt", "probes", "t_grid", "u_grid", "a0", "a_t",
                     "a_u", "a_uu", "T", "n_seeds", "seed"});
  const std::string scan = cfg.get_string("scan", "interval");
  const double p = cfg.get_double("p", 2.0);
  const double dt = cfg.get_double("dt", 0.0);
  const unsigned long long seed = resolve_seed(cfg, args);

  if (scan == "interval") {
    const mrlab::LinearOperatorSpec op = mrlab::LinearOperatorSpec::scalar(cfg.get_double("a", 1.0));
    const std::vector<double> T_grid = cfg.get_doubles("T_grid", {0.5, 1.0, 2.0});
    const int probes = static_cast<int>(cfg.get_int("probes", 2000));
    const mrlab::MonotonicityScan table =
        mrlab::cM_monotonicity_scan(op, T_grid, p, dt, probes, seed);
    return finish(mrlab::report_of(table), cfg, seed, args);
  }
  if (scan == "family") {
    const double a0 = cfg.get_double("a0", 1.0);
    const double a_t = cfg.get_double("a_t", 0.0);
    const double a_u = cfg.get_double("a_u", 0.0);
    const double a_uu = cfg.get_double("a_uu", 1.0);
    mrlab::OperatorFamily family;
    family.eval = [=](double t, double u) {
      return mrlab::LinearOperatorSpec::scalar(a0 + a_t * t + a_u * u + a_uu * u * u);
    };
    const std::vector<double> t_grid = cfg.get_doubles("t_grid", {0.0});
    const std::vector<double> u_grid = cfg.get_doubles("u_grid", {0.0});
    std::vector<std::pair<double, double>> params;
    if (t_grid.size() == u_grid.size()) {
      for (std::size_t i = 0; i < t_grid.size(); ++i) params.emplace_back(t_grid[i], u_grid[i]);
    } else if (t_grid.size() == 1) {
      for (double u : u_grid) params.emplace_back(t_grid.front(), u);
    } else if (u_grid.size() == 1) {
      for (double t : t_grid) params.emplace_back(t, u_grid.front());
    } else {
      throw mrlab::ConfigError("maxreg: t_grid and u_grid sizes are incompatible");
    }
    const mrlab::Interval J{0.0, cfg.get_double("T", 1.0)};
    const int probes = static_cast<int>(cfg.get_int("probes", 1500));
    const int n_seeds = static_cast<int>(cfg.get_int("n_seeds", 5));
    const mrlab::ContinuityScan table =
        mrlab::cM_continuity_scan(family, params, J, p, dt, probes, n_seeds, seed);
    return finish(mrlab::report_of(table), cfg, seed, args);
  }
  throw mrlab::ConfigError("maxreg: `scan` must be `interval` or `family`, got `" + scan + "`");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mrlab: desk-scale studies of quasilinear parabolic evolution solvers"};
  app.require_subcommand(1);
  CommonArgs args;
  CLI::App* mms = app.add_subcommand("mms", "manufactured-solution convergence orders");
  CLI::App* limit = app.add_subcommand("limit", "vanishing-viscosity / perturbed-datum fluid study");
  CLI::App* depend = app.add_subcommand("depend", "scalar continuous-dependence study");
  CLI::App* blowup = app.add_subcommand("blowup", "existence-time sequence study");
  CLI::App* maxreg = app.add_subcommand("maxreg", "maximal-regularity constant scans");
  for (CLI::App* cmd : {mms, limit, depend, blowup, maxreg}) add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);
  try {
    if (mms->parsed()) return run_mms(args);
    if (limit->parsed()) return run_limit(args);
    if (depend->parsed()) return run_depend(args);
    if (blowup->parsed()) return run_blowup(args);
    if (maxreg->parsed()) return run_maxreg(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
