#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "mrlab/core.hpp"
#include "mrlab/evolution.hpp"
#include "mrlab/field.hpp"
#include "mrlab/norms.hpp"
#include "mrlab/projection.hpp"
#include "mrlab/spectral.hpp"
#include "mrlab/viscosity.hpp"

namespace mrlab {

namespace detail {

inline bool same_grid(const GridSpec& a, const GridSpec& b) {
  if (a.dim != b.dim || a.p != b.p) return false;
  for (int ax = 0; ax < 3; ++ax) {
    if (a.n_cells[ax] != b.n_cells[ax] || a.lengths[ax] != b.lengths[ax]) return false;
    if (a.bc[ax][0] != b.bc[ax][0] || a.bc[ax][1] != b.bc[ax][1]) return false;
  }
  return true;
}

/// Ghost refresh for cell-centered coefficient lattices: wrap on periodic
/// axes, even mirror at walls.  Only the wrap matters for the interpolation
/// toward interior faces; wall faces are never assembled.
inline void sync_center_ghosts(Lattice& L, const GridSpec& g) {
  for (int a = 0; a < g.dim; ++a) {
    const bool wrap = g.periodic(a);
    const int n = L.n[a];
    for (int side = 0; side < 2; ++side) {
      const int dst = side == 0 ? -1 : n;
      const int src = wrap ? (side == 0 ? n - 1 : 0) : (side == 0 ? 0 : n - 1);
      for (int k = (a == 2 ? dst : -1); k <= (a == 2 ? dst : L.n[2]); ++k)
        for (int j = (a == 1 ? dst : -1); j <= (a == 1 ? dst : L.n[1]); ++j)
          for (int i = (a == 0 ? dst : -1); i <= (a == 0 ? dst : L.n[0]); ++i) {
            int si = i, sj = j, sk = k;
            (a == 0 ? si : a == 1 ? sj : sk) = src;
            L.at(i, j, k) = L.at(si, sj, sk);
          }
    }
  }
}

}  // namespace detail

/// Symmetric rate-of-deformation tensor D(v) = (grad v + grad v^T)/2 sampled
/// at cell centers, together with the pointwise squared Frobenius magnitude
/// |D(v)|^2 = sum_ij D_ij^2.
struct Deformation {
  TensorField tensor;
  Lattice frob_sq;
};

/// Computes D(v) at cell centers: diagonal entries from the compact face
/// differences, off-diagonal entries from face-to-center interpolation
/// followed by central differences (ghost closures supply wall behavior).
inline Deformation deformation_tensor(const Field& v) {
  if (v.role != Role::velocity) throw std::invalid_argument("deformation_tensor: velocity field required");
  const GridSpec& g = v.grid;
  Deformation out;
  out.tensor = TensorField::make(g);
  out.frob_sq = center_lattice(g);
  const int nz = g.dim == 3 ? g.n_cells[2] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < g.n_cells[1]; ++j)
      for (int i = 0; i < g.n_cells[0]; ++i) {
        const int c[3] = {i, j, k};
        double frob = 0.0;
        for (int a = 0; a < g.dim; ++a) {
          int cp[3] = {i, j, k};
          cp[a] += 1;
          const double daa =
              (v.comps[a].at(cp[0], cp[1], cp[2]) - v.comps[a].at(i, j, k)) / g.spacing(a);
          out.tensor(a, a).at(i, j, k) = daa;
          frob += daa * daa;
          for (int b = a + 1; b < g.dim; ++b) {
            // d_a v_b at the center: average v_b to the center along b, then
            // central difference along a (and symmetrically for d_b v_a).
            auto cross = [&](int comp, int diff_axis, int avg_axis) {
              int pp[3] = {c[0], c[1], c[2]}, pm[3] = {c[0], c[1], c[2]};
              pp[diff_axis] += 1;
              pm[diff_axis] -= 1;
              int pp2[3] = {pp[0], pp[1], pp[2]}, pm2[3] = {pm[0], pm[1], pm[2]};
              pp2[avg_axis] += 1;
              pm2[avg_axis] += 1;
              const Lattice& L = v.comps[comp];
              return (L.at(pp[0], pp[1], pp[2]) + L.at(pp2[0], pp2[1], pp2[2]) -
                      L.at(pm[0], pm[1], pm[2]) - L.at(pm2[0], pm2[1], pm2[2])) /
                     (4.0 * g.spacing(diff_axis));
            };
            const double dab = 0.5 * (cross(b, a, b) + cross(a, b, a));
            out.tensor(a, b).at(i, j, k) = dab;
            out.tensor(b, a).at(i, j, k) = dab;
            frob += 2.0 * dab * dab;
          }
        }
        out.frob_sq.at(i, j, k) = frob;
      }
  return out;
}

/// Quasilinear viscous stress operator: componentwise
///   -( mu(|D(u)|^2) Lap v_i + mu(|D(u)|^2) d_i(div v)
///      + 4 mu'(|D(u)|^2) sum_{k,j,l} D_ik(u) D_jl(u) d_k D_jl(v) ),
/// with second-order stencils throughout.  Coefficients live at cell centers
/// and are averaged to the faces they act on; wall-normal outputs are zero.
/// The d_i(div v) term is evaluated literally even though it vanishes on
/// discretely divergence-free fields.
inline Field apply_An(const ViscosityLaw& law, const Field& u, const Field& v) {
  if (u.role != Role::velocity || v.role != Role::velocity)
    throw std::invalid_argument("apply_An: velocity fields required");
  if (!detail::same_grid(u.grid, v.grid)) throw std::invalid_argument("apply_An: grid mismatch");
  const GridSpec& g = u.grid;
  const int d = g.dim;

  const Deformation du = deformation_tensor(u);
  Lattice mu_c = center_lattice(g);
  Lattice dmu_c = center_lattice(g);
  const int nz = d == 3 ? g.n_cells[2] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < g.n_cells[1]; ++j)
      for (int i = 0; i < g.n_cells[0]; ++i) {
        const double s = du.frob_sq.at(i, j, k);
        mu_c.at(i, j, k) = law.mu(s);
        dmu_c.at(i, j, k) = law.mu_prime(s);
      }
  detail::sync_center_ghosts(mu_c, g);

  // G_k = sum_{j,l} D_jl(u) d_k D_jl(v), then W_i = 4 mu' sum_k D_ik(u) G_k,
  // all at centers.  Skip the whole contraction when mu' vanishes identically.
  const bool shear_active = law.eta != 0.0 && law.alpha != 0.0;
  std::vector<Lattice> W(d);
  if (shear_active) {
    const Deformation dv = deformation_tensor(v);
    std::vector<Lattice> G(d);
    for (int kk = 0; kk < d; ++kk) {
      G[kk] = center_lattice(g);
      for (int jj = 0; jj < d; ++jj)
        for (int ll = 0; ll < d; ++ll) {
          const Lattice der = detail::difference<1>(dv.tensor(jj, ll), g, kk);
          for (int k = 0; k < nz; ++k)
            for (int j = 0; j < g.n_cells[1]; ++j)
              for (int i = 0; i < g.n_cells[0]; ++i)
                G[kk].at(i, j, k) += du.tensor(jj, ll).at(i, j, k) * der.at(i, j, k);
        }
    }
    for (int ii = 0; ii < d; ++ii) {
      W[ii] = center_lattice(g);
      for (int k = 0; k < nz; ++k)
        for (int j = 0; j < g.n_cells[1]; ++j)
          for (int i = 0; i < g.n_cells[0]; ++i) {
            double acc = 0.0;
            for (int kk = 0; kk < d; ++kk)
              acc += du.tensor(ii, kk).at(i, j, k) * G[kk].at(i, j, k);
            W[ii].at(i, j, k) = 4.0 * dmu_c.at(i, j, k) * acc;
          }
      detail::sync_center_ghosts(W[ii], g);
    }
  }

  Lattice divv = mac_divergence(v);
  detail::sync_center_ghosts(divv, g);

  Field out = Field::make(g, Role::velocity);
  for (int c = 0; c < d; ++c) {
    Lattice& O = out.comps[c];
    const Lattice& V = v.comps[c];
    const bool wall_axis = g.wall(c);
    const int f_lo = wall_axis ? 1 : 0;
    const int f_hi = wall_axis ? O.n[c] - 1 : O.n[c];
    int lo[3] = {0, 0, 0}, hi[3] = {O.n[0], O.n[1], O.n[2]};
    lo[c] = f_lo;
    hi[c] = f_hi;
    for (int k = lo[2]; k < hi[2]; ++k)
      for (int j = lo[1]; j < hi[1]; ++j)
        for (int i = lo[0]; i < hi[0]; ++i) {
          double lap = 0.0;
          for (int a = 0; a < d; ++a) {
            int fp[3] = {i, j, k}, fm[3] = {i, j, k};
            fp[a] += 1;
            fm[a] -= 1;
            lap += (V.at(fp[0], fp[1], fp[2]) - 2.0 * V.at(i, j, k) + V.at(fm[0], fm[1], fm[2])) /
                   (g.spacing(a) * g.spacing(a));
          }
          int cm[3] = {i, j, k};
          cm[c] -= 1;
          const double mu_face = 0.5 * (mu_c.at(cm[0], cm[1], cm[2]) + mu_c.at(i, j, k));
          const double graddiv =
              (divv.at(i, j, k) - divv.at(cm[0], cm[1], cm[2])) / g.spacing(c);
          double nl = 0.0;
          if (shear_active)
            nl = 0.5 * (W[c].at(cm[0], cm[1], cm[2]) + W[c].at(i, j, k));
          O.at(i, j, k) = -(mu_face * lap + mu_face * graddiv + nl);
        }
  }
  out.sync_ghosts();
  return out;
}

/// Convective forcing F(v) = -rho (v . grad) v on the staggered layout:
/// transported components interpolated to the target face, derivatives by
/// central differences.  Wall-normal outputs are zero.
inline Field convective_f(const ViscosityLaw& law, const Field& v) {
  if (v.role != Role::velocity) throw std::invalid_argument("convective_f: velocity field required");
  const GridSpec& g = v.grid;
  const int d = g.dim;
  Field out = Field::make(g, Role::velocity);
  for (int c = 0; c < d; ++c) {
    Lattice& O = out.comps[c];
    const Lattice& V = v.comps[c];
    const bool wall_axis = g.wall(c);
    int lo[3] = {0, 0, 0}, hi[3] = {O.n[0], O.n[1], O.n[2]};
    lo[c] = wall_axis ? 1 : 0;
    hi[c] = wall_axis ? O.n[c] - 1 : O.n[c];
    for (int k = lo[2]; k < hi[2]; ++k)
      for (int j = lo[1]; j < hi[1]; ++j)
        for (int i = lo[0]; i < hi[0]; ++i) {
          double adv = 0.0;
          for (int a = 0; a < d; ++a) {
            double va;
            if (a == c) {
              va = V.at(i, j, k);
            } else {
              const Lattice& A = v.comps[a];
              int p0[3] = {i, j, k};
              int p1[3] = {i, j, k};
              p1[a] += 1;
              int p2[3] = {i, j, k}, p3[3] = {i, j, k};
              p2[c] -= 1;
              p3[c] -= 1;
              p3[a] += 1;
              va = 0.25 * (A.at(p0[0], p0[1], p0[2]) + A.at(p1[0], p1[1], p1[2]) +
                           A.at(p2[0], p2[1], p2[2]) + A.at(p3[0], p3[1], p3[2]));
            }
            int fp[3] = {i, j, k}, fm[3] = {i, j, k};
            fp[a] += 1;
            fm[a] -= 1;
            const double dvc =
                (V.at(fp[0], fp[1], fp[2]) - V.at(fm[0], fm[1], fm[2])) / (2.0 * g.spacing(a));
            adv += va * dvc;
          }
          O.at(i, j, k) = -law.rho * adv;
        }
  }
  out.sync_ghosts();
  return out;
}

/// Pressure-gradient witness: the momentum balance gives
/// grad p = (I - P)(F(v) - A_n(v)v), recovered through the projection.
inline Field pressure_witness(const ViscosityLaw& law, const Field& v) {
  Field w = convective_f(law, v);
  w -= apply_An(law, v, v);
  return helmholtz_project(w, std::numeric_limits<double>::infinity()).grad_p;
}

// ---------------------------------------------------------------------------
// Problem assembly.
// ---------------------------------------------------------------------------

struct FluidProblemSpec {
  GridSpec grid;
  ViscosityLaw law;
  Field initial;
  double projection_tol = 1e-10;
  double solver_tol = 1e-10;
  int solver_max_iter = 200;

  void validate() const {
    grid.validate();
    law.validate();
    if (initial.role != Role::velocity)
      throw std::invalid_argument("FluidProblemSpec: initial must be a velocity field");
    if (!detail::same_grid(initial.grid, grid))
      throw std::invalid_argument("FluidProblemSpec: initial field grid mismatch");
    if (!(projection_tol > 0.0) || !(solver_tol > 0.0) || solver_max_iter < 1)
      throw std::invalid_argument("FluidProblemSpec: bad tolerances");
  }
};

/// Boundary-consistent, divergence-free version of the configured datum.
inline Field prepared_initial(const FluidProblemSpec& spec) {
  spec.validate();
  Field v0 = spec.initial;
  apply_boundary(v0);
  return helmholtz_project(v0, spec.projection_tol).v;
}

struct KrylovStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Flexible GMRES (right preconditioning, no restart).  Solves op(x) = rhs to
/// a relative L2 residual of tol, starting from the supplied x.
template <class Op, class Prec>
KrylovStats fgmres(const Op& op, const Prec& prec, const Field& rhs, Field& x, double tol,
                   int max_iter) {
  const double bnorm = std::sqrt(dot_l2(rhs, rhs));
  if (bnorm == 0.0) {
    x = rhs;  // zero right-hand side: zero solution
    return {0, 0.0};
  }
  Field r = rhs;
  r -= op(x);
  const double beta = std::sqrt(dot_l2(r, r));
  if (beta / bnorm <= tol) return {0, beta / bnorm};

  std::vector<Field> V, Z;
  V.push_back((1.0 / beta) * r);
  std::vector<std::vector<double>> H;  // column-major; H[col][row], row <= col+1
  std::vector<double> cs, sn, gvec{beta};
  int cols = 0;
  double res = beta;
  for (int j = 0; j < max_iter; ++j) {
    Z.push_back(prec(V[j]));
    Field w = op(Z.back());
    H.emplace_back(j + 2, 0.0);
    for (int i = 0; i <= j; ++i) {
      const double h = dot_l2(w, V[i]);
      H[j][i] = h;
      w.combine(-h, V[i]);
    }
    const double hh = std::sqrt(dot_l2(w, w));
    H[j][j + 1] = hh;
    for (int i = 0; i < j; ++i) {
      const double t = cs[i] * H[j][i] + sn[i] * H[j][i + 1];
      H[j][i + 1] = -sn[i] * H[j][i] + cs[i] * H[j][i + 1];
      H[j][i] = t;
    }
    const double denom = std::hypot(H[j][j], H[j][j + 1]);
    const double c = denom == 0.0 ? 1.0 : H[j][j] / denom;
    const double s = denom == 0.0 ? 0.0 : H[j][j + 1] / denom;
    cs.push_back(c);
    sn.push_back(s);
    H[j][j] = c * H[j][j] + s * H[j][j + 1];
    H[j][j + 1] = 0.0;
    gvec.push_back(-s * gvec[j]);
    gvec[j] = c * gvec[j];
    res = std::fabs(gvec[j + 1]);
    cols = j + 1;
    if (hh == 0.0 || res / bnorm <= tol) break;
    V.push_back((1.0 / hh) * w);
  }
  std::vector<double> y(cols, 0.0);
  for (int i = cols - 1; i >= 0; --i) {
    double t = gvec[i];
    for (int l = i + 1; l < cols; ++l) t -= H[l][i] * y[l];
    y[i] = t / H[i][i];
  }
  for (int i = 0; i < cols; ++i) x.combine(y[i], Z[i]);
  Field rr = rhs;
  rr -= op(x);
  const double final_res = std::sqrt(dot_l2(rr, rr)) / bnorm;
  if (final_res > tol)
    throw SolverError("fgmres: stalled before reaching the requested tolerance", final_res);
  return {cols, final_res};
}

/// Packages the fluid model as a quasilinear evolution problem:
///   apply_A      = (1/rho) P A_n(u) .
///   eval_f       = (1/rho) P F(u)  = -P (u . grad) u
///   solve_shifted: FGMRES on (I + tau apply_A(u)) w = rhs, preconditioned by
///                  the constant-coefficient inverse P (I + tau nu0 (-Lap))^-1
///   state_norm   = xp_norm (trace-space surrogate, used for blow-up checks)
inline QuasilinearProblem<Field> make_problem(const FluidProblemSpec& spec) {
  spec.validate();
  const ViscosityLaw law = spec.law;
  const double ptol = spec.projection_tol;
  const double stol = spec.solver_tol;
  const int smax = spec.solver_max_iter;
  const double inv_rho = 1.0 / law.rho;

  QuasilinearProblem<Field> prob;
  prob.apply_A = [law, inv_rho](double, const Field& u, const Field& v) {
    Field av = apply_An(law, u, v);
    av *= inv_rho;
    return helmholtz_project(av, std::numeric_limits<double>::infinity()).v;
  };
  prob.eval_f = [law, inv_rho](double, const Field& u) {
    Field f = convective_f(law, u);
    f *= inv_rho;
    return helmholtz_project(f, std::numeric_limits<double>::infinity()).v;
  };
  prob.solve_shifted = [law, inv_rho, ptol, stol, smax](double t, const Field& u,
                                                        const Field& rhs, double tau) {
    auto op = [&](const Field& w) {
      Field av = apply_An(law, u, w);
      av *= inv_rho * tau;
      Field res = w;
      res += helmholtz_project(av, std::numeric_limits<double>::infinity()).v;
      return res;
    };
    const double nu0 = tau * law.mu(0.0) * inv_rho;
    auto prec = [&](const Field& w) {
      Field z = w;
      spectral::helmholtz_velocity_solve(z, nu0);
      return helmholtz_project(z, std::numeric_limits<double>::infinity()).v;
    };
    Field x = rhs;
    fgmres(op, prec, rhs, x, stol, smax);
    // Final projection pass: guarantees the divergence invariant on the
    // recorded state and fails loudly if it cannot be met.
    return helmholtz_project(x, ptol).v;
  };
  prob.state_norm = [](const Field& u) { return xp_norm(u); };
  return prob;
}

// ---------------------------------------------------------------------------
// Empirical operator bounds.
// ---------------------------------------------------------------------------

struct LipschitzTriple {
  Field u1, u2, v;
};

struct LipschitzReport {
  double operator_ratio = 0.0;  // max |A(u1)v - A(u2)v|_X0 / (|u1-u2|_Xp |v|_X1)
  double forcing_ratio = 0.0;   // max |F(u1) - F(u2)|_X0 / |u1-u2|_Xp
  double bound_R = 0.0;
  int used = 0;
  int skipped = 0;
};

/// Empirical Lipschitz moduli of the operator and the convective forcing over
/// an ensemble of triples bounded by R in the trace norm.  Coincident pairs
/// contribute nothing and are skipped; an all-coincident ensemble is an error.
inline LipschitzReport lipschitz_report(const ViscosityLaw& law,
                                        const std::vector<LipschitzTriple>& ensemble, double R) {
  if (ensemble.empty()) throw std::invalid_argument("lipschitz_report: empty ensemble");
  LipschitzReport rep;
  rep.bound_R = R;
  for (const auto& tr : ensemble) {
    const double du = xp_norm(tr.u1 - tr.u2);
    if (du == 0.0) {
      ++rep.skipped;
      continue;
    }
    const double x1v = x1_norm(tr.v);
    if (x1v == 0.0) {
      ++rep.skipped;
      continue;
    }
    const double op_num = x0_norm(apply_An(law, tr.u1, tr.v) - apply_An(law, tr.u2, tr.v));
    const double f_num = x0_norm(convective_f(law, tr.u1) - convective_f(law, tr.u2));
    rep.operator_ratio = std::max(rep.operator_ratio, op_num / (du * x1v));
    rep.forcing_ratio = std::max(rep.forcing_ratio, f_num / du);
    ++rep.used;
  }
  if (rep.used == 0)
    throw std::invalid_argument("lipschitz_report: all ensemble pairs coincide");
  return rep;
}

struct OperatorProbe {
  Field u, v;
};

/// max over the ensemble of |(A_n(u) - A_inf(u)) v|_X0 / |v|_X1, the measured
/// operator gap between two viscosity laws at shared probe states.
inline double operator_distance(const ViscosityLaw& law_n, const ViscosityLaw& law_inf,
                                const std::vector<OperatorProbe>& ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("operator_distance: empty ensemble");
  double dist = 0.0;
  for (const auto& pr : ensemble) {
    const double x1v = x1_norm(pr.v);
    if (x1v == 0.0) throw std::invalid_argument("operator_distance: probe v has zero X1 norm");
    const double num = x0_norm(apply_An(law_n, pr.u, pr.v) - apply_An(law_inf, pr.u, pr.v));
    dist = std::max(dist, num / x1v);
  }
  return dist;
}

/// Deterministic smooth pseudo-random field: a few low-wavenumber separable
/// trigonometric modes per component with seeded coefficients.  Wall axes use
/// homogeneous sine profiles so the samples respect the boundary tags.
inline Field random_smooth_field(const GridSpec& g, unsigned long long seed, int modes = 3) {
  struct Mode {
    double amp;
    int k[3];
    double phase[3];
  };
  std::vector<std::vector<Mode>> all(g.dim);
  for (int c = 0; c < g.dim; ++c) {
    std::mt19937_64 rng(mix_seed(seed, 0x9e3779b9u + static_cast<unsigned>(c)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int m = 0; m < modes; ++m) {
      Mode mo;
      mo.amp = 2.0 * unif(rng) - 1.0;
      for (int a = 0; a < 3; ++a) {
        mo.k[a] = 1 + static_cast<int>(unif(rng) * 2.0);
        mo.phase[a] = 2.0 * M_PI * unif(rng);
      }
      all[c].push_back(mo);
    }
  }
  Field f = Field::make(g, Role::velocity);
  f.sample([&](const std::array<double, 3>& x, int c) {
    double val = 0.0;
    for (const auto& mo : all[c]) {
      double term = mo.amp;
      for (int a = 0; a < g.dim; ++a) {
        const double arg = 2.0 * M_PI * mo.k[a] * x[a] / g.lengths[a];
        term *= g.periodic(a) ? std::sin(arg + mo.phase[a])
                              : std::sin(M_PI * mo.k[a] * x[a] / g.lengths[a]);
      }
      val += term;
    }
    return val;
  });
  apply_boundary(f);
  return f;
}

}  // namespace mrlab
