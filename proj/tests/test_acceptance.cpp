// Acceptance suite: ten numbered end-to-end criteria over the full-scale
// configurations.  Each criterion prints exactly one verdict line
//   [CRITERION k] <name>: PASS|FAIL
// and lists its failed sub-checks, if any, underneath.  All tolerances are
// pinned as constants below.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mrlab/config.hpp"
#include "mrlab/maxreg.hpp"
#include "mrlab/report.hpp"
#include "mrlab/studies.hpp"
#include "symbolic_oracle.hpp"

using namespace mrlab;

namespace {

// ---------------------------------------------------------------------------
// Pinned acceptance tolerances.
// ---------------------------------------------------------------------------
constexpr double kSpatialOrderMin = 1.8;   // manufactured-solution space order
constexpr double kTemporalOrderMin = 0.9;  // manufactured-solution time order
constexpr double kInitialTol = 1e-12;      // projected datum must equal the datum
constexpr double kDivergenceTol = 1e-9;    // solenoidality along every trajectory
constexpr double kEstimatorAgreement = 0.05;  // estimator vs direct search, relative
constexpr double kSlopeMin = 0.8;          // gap-vs-driver log-log slope band
constexpr double kSlopeMax = 1.2;
constexpr double kGapShrink = 1e-3;        // final/initial E1 gap unless at the floor
constexpr double kRatioSpreadMax = 2.0;    // dependence ratio stability across deltas
constexpr double kTwoGridFactorMax = 2.0;  // interpolation constants across grids
constexpr double kEmbeddingMax = 1.5;      // embedding ratios and their spread
constexpr double kOracleOrderMin = 1.8;    // symbolic-oracle convergence order
constexpr double kHorizonTol = 5e-3;       // Riccati horizon vs closed form
constexpr double kLimitHorizonTol = 2e-3;  // horizon of the limit datum vs 1.0
constexpr double kEtaLinearityTol = 1e-12; // 2D operator-distance linearity
constexpr double kHalvingTol = 1e-10;      // 3D operator-distance halving

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Collects named sub-checks; the criterion passes iff all of them hold.
struct Checklist {
  std::vector<std::string> failures;
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void time_limit(Clock::time_point t0, double limit, const char* label) {
    const double s = seconds_since(t0);
    require(s < limit, std::string(label) + " runtime " + num(s) + "s < " + num(limit) + "s");
  }
  bool ok() const { return failures.empty(); }
};

void announce(int k, const char* name, const Checklist& c) {
  std::printf("[CRITERION %d] %s: %s\n", k, name, c.ok() ? "PASS" : "FAIL");
  std::string joined;
  for (const auto& f : c.failures) {
    std::printf("    failed: %s\n", f.c_str());
    joined += f + "; ";
  }
  std::fflush(stdout);
  EXPECT_TRUE(c.ok()) << joined;
}

// ---------------------------------------------------------------------------
// Shared full-scale artifacts (built once, reused across criteria).
// ---------------------------------------------------------------------------

const MmsTable& mms_table() {
  static const MmsTable t = run_mms_verification(MmsConfig{});  // n {16,32,64}
  return t;
}

LimitStudyConfig limit_base() {
  const GridSpec g = periodic_box(2, 32, 2.0 * M_PI, 5.0);
  LimitStudyConfig cfg;
  cfg.base.grid = g;
  cfg.base.law = ViscosityLaw{1.0, 0.0, 0.0, 1.0};  // planar exponent (d-2)/2 = 0
  cfg.base.initial = taylor_green(g);
  cfg.T_K = 0.5;
  cfg.step.dt = 2.5e-3;
  return cfg;
}

const ConvergenceTable& limit_table() {
  static const ConvergenceTable t = [] {
    LimitStudyConfig cfg = limit_base();
    for (int n = 0; n <= 8; ++n) cfg.eta_sequence.push_back(std::pow(2.0, -n));
    return run_limit_study(cfg);
  }();
  return t;
}

DependenceConfig quadratic_family() {
  DependenceConfig cfg;
  cfg.dimension = 1;
  cfg.T_K = 0.5;
  cfg.step.dt = 1e-3;
  cfg.delta_grid = {1e-1, 1e-2, 1e-3, 1e-4};
  cfg.A = [](double, const Eigen::VectorXd& u) {
    return Eigen::MatrixXd::Constant(1, 1, 1.0 + u[0] * u[0]);
  };
  cfg.f = [](double, const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::VectorXd::Zero(1)); };
  cfg.u0 = [](double d) { return Eigen::VectorXd(Eigen::VectorXd::Constant(1, 0.5 + d)); };
  cfg.declared_lipschitz_A = 2.0;  // |d/du (1 + u^2)| <= 2R on [-R, R], R = 1
  return cfg;
}

BlowupConfig riccati_family(int levels) {
  BlowupConfig cfg;
  cfg.problem = riccati_problem();
  for (int k = 0; k < levels; ++k) {
    const double n = std::pow(2.0, k);
    cfg.labels.push_back(n);
    cfg.u0_sequence.push_back(Eigen::VectorXd::Constant(1, 1.0 + 1.0 / n));
  }
  cfg.u0_limit = Eigen::VectorXd::Constant(1, 1.0);
  cfg.t_max = 2.0;
  cfg.step.dt = 1e-4;
  cfg.step.blowup_threshold = 1e3;
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// 1. Manufactured-solution convergence of the fluid solver.
// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion01) {
  const auto t0 = Clock::now();
  Checklist c;
  const MmsTable& t = mms_table();
  c.require(t.spatial_order >= kSpatialOrderMin,
            "spatial order " + num(t.spatial_order) + " >= " + num(kSpatialOrderMin));
  c.require(t.temporal_order >= kTemporalOrderMin,
            "temporal order " + num(t.temporal_order) + " >= " + num(kTemporalOrderMin));
  c.require(t.initial_error <= kInitialTol,
            "initial error " + num(t.initial_error) + " <= " + num(kInitialTol));
  c.require(t.max_divergence <= kDivergenceTol,
            "max divergence " + num(t.max_divergence) + " <= " + num(kDivergenceTol));
  c.require(t.pass, "verification table pass flag");
  c.time_limit(t0, 60.0, "mms");
  announce(1, "manufactured-solution orders (space >= 1.8, time >= 0.9)", c);
}

// ---------------------------------------------------------------------------
// 2. Deterministic replay and content-addressed reporting.
// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion02) {
  const auto t0 = Clock::now();
  Checklist c;

  // Bitwise determinism of a full study under replay.
  LimitStudyConfig trivial;
  {
    const GridSpec g = periodic_box(2, 16, 2.0 * M_PI, 5.0);
    trivial.base.grid = g;
    trivial.base.law = ViscosityLaw{1.0, 0.0, 0.0, 1.0};
    trivial.base.initial = taylor_green(g);
    trivial.eta_sequence = {0.0, 0.0, 0.0};
    trivial.T_K = 0.1;
    trivial.step.dt = 5e-3;
  }
  const std::string csv_a = report_of(run_limit_study(trivial)).csv.to_string();
  const std::string csv_b = report_of(run_limit_study(trivial)).csv.to_string();
  c.require(csv_a == csv_b, "repeated study emits byte-identical CSV");
  c.require(git_blob_sha1(csv_a) == git_blob_sha1(csv_b), "repeated study hash stable");

  // Content-addressed emission of the cached verification table.
  const StudyReport rep = report_of(mms_table());
  const Config echo = Config::from_string("study = mms_full\nseed = 1\n", "acceptance.cfg");
  const std::string stem =
      std::filesystem::path(::testing::TempDir()) / "acceptance_mms_report";
  const ReportPaths paths = write_report(rep, echo, 1, 1, stem);
  c.require(std::filesystem::exists(paths.csv_path), "CSV file exists");
  c.require(std::filesystem::exists(paths.json_path), "JSON file exists");

  std::ifstream csv_in(paths.csv_path, std::ios::binary);
  std::stringstream csv_buf;
  csv_buf << csv_in.rdbuf();
  c.require(git_blob_sha1(csv_buf.str()) == paths.content_hash,
            "recorded hash recomputes from the CSV bytes on disk");

  std::ifstream json_in(paths.json_path);
  const Json doc = Json::parse(json_in, nullptr, false);
  c.require(!doc.is_discarded(), "JSON report parses");
  if (!doc.is_discarded()) {
    c.require(doc.value("content_hash", "") == paths.content_hash, "JSON mirrors the hash");
    c.require(doc.contains("config") && doc["config"].value("study", "") == "mms_full",
              "JSON echoes the configuration");
    c.require(doc.value("pass", false) == rep.pass(), "JSON pass mirrors the verdicts");
  }

  // %.17g serialization round-trips every summary scalar exactly.
  for (double v : {mms_table().spatial_order, mms_table().temporal_order,
                   mms_table().initial_error, mms_table().max_divergence})
    c.require(std::stod(format_real(v)) == v, "format_real round-trips " + num(v));

  c.time_limit(t0, 60.0, "reporting");
  announce(2, "deterministic replay and content-addressed reports", c);
}

// ---------------------------------------------------------------------------
// 3. Regularity-constant estimator against an independent maximizer, with
//    interval monotonicity and parameter continuity.
// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion03) {
  const auto t0 = Clock::now();
  Checklist c;
  const Interval J{0.0, 1.0};

  const LinearOperatorSpec op = LinearOperatorSpec::scalar(1.0);
  const MaxRegEstimate est = estimate_cM(op, J, 2.0, 50, 42);
  const double direct = cM_direct_search(op, J, 2.0);
  c.require(std::isfinite(est.value) && est.value > 1.0,
            "estimate " + num(est.value) + " finite and > 1");
  c.require(std::fabs(est.value - direct) <= kEstimatorAgreement * direct,
            "estimator " + num(est.value) + " within 5% of direct search " + num(direct));

  // Stiffer operators regularize harder: the constant decreases in lambda.
  const double e1 = est.value;
  const double e2 = estimate_cM(LinearOperatorSpec::scalar(2.0), J, 2.0, 50, 42).value;
  const double e4 = estimate_cM(LinearOperatorSpec::scalar(4.0), J, 2.0, 50, 42).value;
  c.require(e1 > e2 && e2 > e4,
            "lambda ordering " + num(e1) + " > " + num(e2) + " > " + num(e4));

  // Interval monotonicity: C(A; [0, T]) is non-decreasing in T.
  const MonotonicityScan mono = cM_monotonicity_scan(op, {0.5, 1.0, 2.0}, 2.0);
  c.require(mono.non_decreasing, "interval scan non-decreasing");
  c.require(mono.rows.size() == 3 && mono.rows.front().value < mono.rows.back().value,
            "interval scan strictly grows over a doubling");

  // Parameter continuity over the family a(u) = 1 + u^2 on u in [0, 1].
  OperatorFamily fam;
  fam.eval = [](double, double u) { return LinearOperatorSpec::scalar(1.0 + u * u); };
  std::vector<std::pair<double, double>> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back({0.0, i / 20.0});
  const ContinuityScan scan = cM_continuity_scan(fam, grid, J, 2.0, 0.0, 400, 5);
  c.require(std::isfinite(scan.kappa) && scan.kappa > 0.0,
            "continuity modulus kappa " + num(scan.kappa) + " finite");
  c.require(scan.modulus_ok, "modulus dominates all grid increments");
  c.require(std::isfinite(scan.grid_max) && scan.grid_max > 1.0,
            "family max " + num(scan.grid_max) + " finite");
  c.require(scan.rows.front().value > scan.rows.back().value,
            "constant decreases from u=0 to u=1 (stiffening family)");
  for (const auto& row : scan.rows)
    c.require(row.noise <= 0.05 * row.value,
              "seed noise " + num(row.noise) + " small at u=" + num(row.u));

  c.time_limit(t0, 120.0, "estimator");
  announce(3, "regularity-constant estimator, monotonicity and continuity", c);
}

// ---------------------------------------------------------------------------
// 4. Vanishing-viscosity convergence to the Newtonian limit.
// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion04) {
  const auto t0 = Clock::now();
  Checklist c;
  const ConvergenceTable& t = limit_table();

  c.require(t.rows.size() == 9, "nine halvings of the coupling");
  for (const auto& r : t.rows)
    c.require(!r.blew_up, "run eta=" + num(r.eta_n) + " completed");
  c.require(t.monotone_to_floor, "gaps non-increasing above the floor");
  c.require(t.strict_to_floor, "gaps strictly decreasing above the floor");
  c.require(t.floor_estimate > 0.0, "positive discretization floor");
  c.require(t.fitted_rows >= 6, "enough rows above the floor for the fit");
  c.require(t.slope >= kSlopeMin && t.slope <= kSlopeMax,
            "gap slope " + num(t.slope) + " in [" + num(kSlopeMin) + ", " + num(kSlopeMax) + "]");

  const double first = t.rows.front().e1_gap;
  const double last = t.rows.back().e1_gap;
  c.require(last <= kGapShrink * first || t.rows.back().at_floor,
            "final gap " + num(last) + " <= 1e-3 x initial " + num(first) +
                " or at the floor (floor " + num(t.floor_estimate) + ")");

  c.require(t.pressure_dominated, "pressure witness controlled on every row");
  c.require(t.pressure_c < 1.0, "pressure constant " + num(t.pressure_c) + " < 1");
  c.require(t.max_divergence <= kDivergenceTol,
            "max divergence " + num(t.max_divergence) + " <= " + num(kDivergenceTol));

  c.time_limit(t0, 300.0, "limit study");
  announce(4, "vanishing-viscosity gaps track the coupling to the floor", c);
}

// ---------------------------------------------------------------------------
// 5. Continuous dependence on the data and on the coefficients.
// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion05) {
  const auto t0 = Clock::now();
  Checklist c;

  // Fluid side: perturb only the datum, four decades of delta.
  {
    LimitStudyConfig cfg = limit_base();
    cfg.eta_sequence = {0.0, 0.0, 0.0, 0.0};
    cfg.data_deltas = {1e-1, 1e-2, 1e-3, 1e-4};
    cfg.perturbation = random_smooth_field(cfg.base.grid, 2024);
    const ConvergenceTable t = run_limit_study(cfg);
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& r : t.rows) {
      c.require(!r.blew_up, "fluid run delta-row completed");
      c.require(r.data_gap > 0.0, "datum gap positive");
      const double ratio = r.e1_gap / r.data_gap;
      rmin = std::min(rmin, ratio);
      rmax = std::max(rmax, ratio);
    }
    c.require(rmax / rmin < kRatioSpreadMax,
              "fluid gap/datum ratio spread " + num(rmax / rmin) + " < 2");
    c.require(t.slope >= kSlopeMin && t.slope <= kSlopeMax,
              "fluid dependence slope " + num(t.slope) + " in band");
  }

  // Lumped side: the quadratic family with a verified Lipschitz hypothesis.
  {
    const DependenceTable t = run_dependence_study(quadratic_family());
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& r : t.rows) {
      c.require(!r.blew_up, "lumped run completed at delta=" + num(r.delta));
      rmin = std::min(rmin, r.ratio);
      rmax = std::max(rmax, r.ratio);
    }
    c.require(rmax / rmin < kRatioSpreadMax,
              "lumped ratio spread " + num(rmax / rmin) + " < 2");
    c.require(t.gap_vanishes, "gap vanishes with the driver");
    c.require(t.slope >= kSlopeMin && t.slope <= kSlopeMax,
              "lumped slope " + num(t.slope) + " in band");
    c.require(std::isfinite(t.fitted_c) && t.fitted_c > 0.0,
              "stability constant " + num(t.fitted_c) + " finite");

    // The hypothesis gate: an understated Lipschitz bound must be refused.
    DependenceConfig bad = quadratic_family();
    bad.declared_lipschitz_A = 0.5;
    bool thrown = false;
    try {
      run_dependence_study(bad);
    } catch (const AssumptionError&) {
      thrown = true;
    }
    c.require(thrown, "understated Lipschitz bound raises the hypothesis error");
  }

  c.time_limit(t0, 300.0, "dependence study");
  announce(5, "dependence gaps stay proportional to their drivers", c);
}

// ---------------------------------------------------------------------------
// 6. Blow-up horizons against the Riccati closed form.
// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion06) {
  const auto t0 = Clock::now();
  Checklist c;

  const BlowupTable t = run_blowup_study(riccati_family(16));  // n = 2^0 .. 2^15
  c.require(t.rows.size() == 16, "sixteen data levels");
  double worst = 0.0;
  for (const auto& r : t.rows) {
    c.require(r.blew_up, "escape detected at n=" + num(r.n));
    worst = std::max(worst, std::fabs(r.T_n - r.n / (r.n + 1.0)));
  }
  c.require(worst <= kHorizonTol,
            "worst horizon deviation " + num(worst) + " <= " + num(kHorizonTol));
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    // Adjacent closed-form horizons closer than the step size can land on the
    // same discrete crossing; demand strictness only where dt resolves them.
    const auto horizon = [](const BlowupRow& r) { return r.n / (r.n + 1.0); };
    const bool resolvable = horizon(t.rows[i]) - horizon(t.rows[i - 1]) > 2.0 * 1e-4;
    c.require(resolvable ? t.rows[i].T_n > t.rows[i - 1].T_n
                         : t.rows[i].T_n >= t.rows[i - 1].T_n,
              "horizons increase with n (row " + num(t.rows[i].n) + ")");
  }
  c.require(t.limit_blew_up, "limit datum escapes");
  c.require(std::fabs(t.T_limit - 1.0) <= kLimitHorizonTol,
            "limit horizon " + num(t.T_limit) + " near 1.0");
  c.require(t.inequality_ok, "limit horizon <= tail sup + 2 dt");
  c.require(!t.inconclusive, "study is conclusive");

  // A family that never escapes within the window must say so.
  BlowupConfig sub = riccati_family(3);
  for (auto& u0 : sub.u0_sequence) u0 = Eigen::VectorXd::Constant(1, 0.2);
  sub.u0_limit = Eigen::VectorXd::Constant(1, 0.2);
  const BlowupTable s = run_blowup_study(sub);
  c.require(s.inconclusive, "subcritical family reported as inconclusive");

  c.time_limit(t0, 30.0, "blow-up study");
  announce(6, "blow-up horizons match the closed form within 5e-3", c);
}

// ---------------------------------------------------------------------------
// 7. Operator distance is linear in the coupling; ellipticity certificates.
// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion07) {
  const auto t0 = Clock::now();
  Checklist c;

  // Planar exponent 0: the law difference is the constant eta, so the
  // measured distance divided by eta must be eta-independent to rounding.
  {
    const GridSpec g = periodic_box(2, 32);
    std::vector<OperatorProbe> ens;
    for (unsigned s = 1; s <= 3; ++s)
      ens.push_back({random_smooth_field(g, s), random_smooth_field(g, 100 + s)});
    const ViscosityLaw law0 = ViscosityLaw::for_dim(2, 1.0, 0.0);
    double per_eta[3] = {};
    const double etas[3] = {1e-1, 1e-2, 1e-3};
    for (int i = 0; i < 3; ++i)
      per_eta[i] = operator_distance(ViscosityLaw::for_dim(2, 1.0, etas[i]), law0, ens) / etas[i];
    c.require(per_eta[0] > 0.0, "distance positive");
    for (int i = 1; i < 3; ++i)
      c.require(std::fabs(per_eta[i] - per_eta[0]) <= kEtaLinearityTol * per_eta[0],
                "distance/eta constant across eta=" + num(etas[i]));
  }

  // 3D exponent 1/2: mu - mu_inf and mu' both carry eta, so halving eta
  // halves the distance even though the law is nonlinear in the shear.
  {
    const GridSpec g = periodic_box(3, 8, 2.0 * M_PI, 6.0);
    std::vector<OperatorProbe> ens;
    for (unsigned s = 1; s <= 2; ++s)
      ens.push_back({random_smooth_field(g, s), random_smooth_field(g, 50 + s)});
    const ViscosityLaw law0 = ViscosityLaw::for_dim(3, 1.0, 0.0);
    const double d1 = operator_distance(ViscosityLaw::for_dim(3, 1.0, 0.4), law0, ens);
    const double d2 = operator_distance(ViscosityLaw::for_dim(3, 1.0, 0.2), law0, ens);
    c.require(d1 > 0.0, "3D distance positive");
    c.require(std::fabs(d2 / d1 - 0.5) <= kHalvingTol,
              "halving ratio " + num(d2 / d1) + " equals 1/2");
  }

  // Every law in the study family is uniformly elliptic; a shear-thinning
  // law that loses monotonicity is flagged, not certified.
  c.require(ellipticity_scan(ViscosityLaw::for_dim(2, 1.0, 0.7)).uniformly_elliptic,
            "planar family certified elliptic");
  c.require(ellipticity_scan(ViscosityLaw::for_dim(3, 1.0, 0.5)).uniformly_elliptic,
            "3D family certified elliptic");
  c.require(!ellipticity_scan(ViscosityLaw{0.01, 1.0, -0.75, 1.0}).uniformly_elliptic,
            "thinning counterexample refused");

  c.time_limit(t0, 60.0, "operator distance");
  announce(7, "operator distance linear in the coupling; ellipticity certified", c);
}

// ---------------------------------------------------------------------------
// 8. Interpolation and embedding constants are bounded across grids.
// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion08) {
  const auto t0 = Clock::now();
  Checklist c;

  // Interpolation constants |.|_X1 / sqrt(|.|_X0 |.|_Xp): 100-member random
  // ensemble augmented with the worst known deterministic probe (a single
  // shear mode), evaluated on two refinements.
  {
    const GridSpec g32 = periodic_box(2, 32, 2.0 * M_PI, 5.0);
    const GridSpec g64 = periodic_box(2, 64, 2.0 * M_PI, 5.0);
    auto sine_probe = [](const GridSpec& g) {
      Field f = Field::make(g, Role::velocity);
      f.sample([](const std::array<double, 3>& x, int comp) {
        return comp == 0 ? std::sin(x[0]) : 0.0;
      });
      return interpolation_check(f);
    };
    double aug32 = sine_probe(g32), aug64 = sine_probe(g64);
    for (int s = 0; s < 100; ++s) {
      aug32 = std::max(aug32, interpolation_check(random_smooth_field(g32, 100 + s)));
      aug64 = std::max(aug64, interpolation_check(random_smooth_field(g64, 100 + s)));
    }
    c.require(aug32 > 1.0 && aug64 > 1.0, "ensembles are non-degenerate");
    c.require(aug32 < 4.0 && aug64 < 4.0,
              "ensemble maxima " + num(aug32) + ", " + num(aug64) + " < 4");
    const double factor = std::max(aug32, aug64) / std::min(aug32, aug64);
    c.require(factor < kTwoGridFactorMax,
              "two-grid interpolation factor " + num(factor) + " < 2");
  }

  // Embedding ratios sup_t |u|_X0 / E1: a decaying flow at two step sizes
  // plus a synthetic worst case (linear ramp from zero data).
  {
    const GridSpec g = periodic_box(2, 32, 2.0 * M_PI, 5.0);
    FluidProblemSpec spec;
    spec.grid = g;
    spec.law = ViscosityLaw{1.0, 0.0, 0.0, 1.0};
    spec.initial = taylor_green(g);
    StepConfig s1, s2;
    s1.dt = 1e-2;
    s2.dt = 5e-3;
    const double r1 = embedding_ratio(integrate_fluid(spec, 0.2, s1).traj);
    const double r2 = embedding_ratio(integrate_fluid(spec, 0.2, s2).traj);
    Trajectory<Field> ramp;
    ramp.t0 = 0.0;
    ramp.dt = 1e-2;
    const Field w = random_smooth_field(g, 7);
    for (int k = 0; k <= 20; ++k) ramp.states.push_back((k * ramp.dt) * w);
    const double r3 = embedding_ratio(ramp);
    c.require(r1 < kEmbeddingMax && r2 < kEmbeddingMax,
              "flow embedding ratios " + num(r1) + ", " + num(r2) + " < 1.5");
    c.require(std::max(r1, r2) / std::min(r1, r2) < kEmbeddingMax,
              "embedding stable across step sizes");
    c.require(r3 < kEmbeddingMax, "ramp embedding ratio " + num(r3) + " < 1.5");
  }

  c.time_limit(t0, 120.0, "interpolation/embedding");
  announce(8, "interpolation and embedding constants grid-robust", c);
}

// ---------------------------------------------------------------------------
// 9. Empirical Lipschitz moduli of the fluid operator pair.
// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion09) {
  const auto t0 = Clock::now();
  Checklist c;
  const ViscosityLaw law{1.0, 0.5, 0.5, 1.0};
  auto make_ens = [](const GridSpec& g, int count) {
    std::vector<LipschitzTriple> ens;
    for (int s = 0; s < count; ++s)
      ens.push_back({random_smooth_field(g, 500 + 3 * s), random_smooth_field(g, 501 + 3 * s),
                     random_smooth_field(g, 502 + 3 * s)});
    return ens;
  };
  const GridSpec g16 = periodic_box(3, 16, 2.0 * M_PI, 6.0);
  const GridSpec g32 = periodic_box(3, 32, 2.0 * M_PI, 6.0);

  const LipschitzReport wide = lipschitz_report(law, make_ens(g16, 50), 10.0);
  c.require(wide.used == 50 && wide.skipped == 0, "all 50 probe triples usable");
  c.require(std::isfinite(wide.operator_ratio) && wide.operator_ratio > 0.0,
            "operator modulus " + num(wide.operator_ratio) + " finite and positive");
  c.require(std::isfinite(wide.forcing_ratio) && wide.forcing_ratio > 0.0,
            "forcing modulus " + num(wide.forcing_ratio) + " finite and positive");
  c.require(wide.operator_ratio < 10.0 && wide.forcing_ratio < 10.0,
            "moduli below the hypothesis radius");

  // Shared-seed ensembles on two refinements: the moduli are grid-stable.
  const LipschitzReport a16 = lipschitz_report(law, make_ens(g16, 12), 10.0);
  const LipschitzReport a32 = lipschitz_report(law, make_ens(g32, 12), 10.0);
  const double fop = std::max(a16.operator_ratio, a32.operator_ratio) /
                     std::min(a16.operator_ratio, a32.operator_ratio);
  const double ff = std::max(a16.forcing_ratio, a32.forcing_ratio) /
                    std::min(a16.forcing_ratio, a32.forcing_ratio);
  c.require(fop <= 2.0, "operator modulus two-grid factor " + num(fop) + " <= 2");
  c.require(ff <= 2.0, "forcing modulus two-grid factor " + num(ff) + " <= 2");

  // The Newtonian operator ignores its coefficient argument entirely.
  const LipschitzReport newton =
      lipschitz_report(ViscosityLaw{1.0, 0.0, 0.5, 1.0}, make_ens(g16, 5), 10.0);
  c.require(newton.operator_ratio == 0.0, "Newtonian operator modulus exactly zero");

  c.time_limit(t0, 300.0, "lipschitz ensembles");
  announce(9, "empirical Lipschitz moduli finite and grid-stable", c);
}

// ---------------------------------------------------------------------------
// 10. Independent symbolic oracle confirms second-order operator accuracy.
// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion10) {
  const auto t0 = Clock::now();
  Checklist c;
  const ViscosityLaw law = ViscosityLaw::for_dim(3, 1.0, 0.5);
  const int levels[3] = {8, 16, 32};
  oracle_bench::WindowError errs[3];
  for (int i = 0; i < 3; ++i) errs[i] = oracle_bench::benchmark_error(law, levels[i]);
  for (int i = 1; i < 3; ++i) {
    c.require(errs[i].max_err < errs[i - 1].max_err, "max error decreases under refinement");
    c.require(errs[i].l2_err < errs[i - 1].l2_err, "L2 error decreases under refinement");
  }
  const double order_max = std::log2(errs[0].max_err / errs[2].max_err) / 2.0;
  const double order_l2 = std::log2(errs[0].l2_err / errs[2].l2_err) / 2.0;
  c.require(order_max >= kOracleOrderMin,
            "max-norm order " + num(order_max) + " >= " + num(kOracleOrderMin));
  c.require(order_l2 >= kOracleOrderMin,
            "L2-norm order " + num(order_l2) + " >= " + num(kOracleOrderMin));

  c.time_limit(t0, 120.0, "symbolic oracle");
  announce(10, "symbolic oracle confirms second-order operator accuracy", c);
}
