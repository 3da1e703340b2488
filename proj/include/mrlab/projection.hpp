#pragma once

#include "mrlab/core.hpp"
#include "mrlab/norms.hpp"
#include "mrlab/spectral.hpp"

namespace mrlab {

/// Staggered divergence: face differences into cell centers.
inline Lattice mac_divergence(const Field& u) {
  const GridSpec& g = u.grid;
  Lattice div = center_lattice(g);
  for (int k = 0; k < div.n[2]; ++k)
    for (int j = 0; j < div.n[1]; ++j)
      for (int i = 0; i < div.n[0]; ++i) {
        double s = 0.0;
        for (int c = 0; c < g.dim; ++c) {
          const Lattice& L = u.comps[c];
          int ip[3] = {i, j, k};
          ip[c] += 1;
          if (g.periodic(c) && ip[c] == L.n[c]) ip[c] = 0;
          s += (L.at(ip[0], ip[1], ip[2]) - L.at(i, j, k)) / g.spacing(c);
        }
        div.at(i, j, k) = s;
      }
  return div;
}

/// Compact gradient of a center scalar onto the velocity faces; wall-normal
/// faces carry the homogeneous Neumann value 0.
inline Field face_gradient(const GridSpec& g, const Lattice& q) {
  Field grad = Field::make(g, Role::velocity);
  for (int c = 0; c < g.dim; ++c) {
    Lattice& L = grad.comps[c];
    for (int k = 0; k < L.n[2]; ++k)
      for (int j = 0; j < L.n[1]; ++j)
        for (int i = 0; i < L.n[0]; ++i) {
          const int f = c == 0 ? i : c == 1 ? j : k;
          if (g.wall(c) && (f == 0 || f == L.n[c] - 1)) {
            L.at(i, j, k) = 0.0;
            continue;
          }
          int im[3] = {i, j, k};
          im[c] -= 1;
          if (g.periodic(c) && im[c] < 0) im[c] = g.n_cells[c] - 1;
          L.at(i, j, k) = (q.at(i, j, k) - q.at(im[0], im[1], im[2])) / g.spacing(c);
        }
  }
  grad.sync_ghosts();
  return grad;
}

struct ProjectionResult {
  Field v;       // divergence-free part
  Field grad_p;  // gradient witness, v + grad_p == input
};

/// Discrete Helmholtz decomposition w = v + grad q: q solves the
/// cell-centered Poisson problem Delta q = div w with tag-matching closure
/// (periodic / homogeneous Neumann) and zero mean.  The projection is exact
/// at the stencil level, so divergence_norm(v) lands at rounding level; if it
/// exceeds tol (e.g. the input carries flux through a wall, which homogeneous
/// Neumann cannot remove) a SolverError reports the residual.
inline ProjectionResult helmholtz_project(const Field& w, double tol = 1e-10) {
  if (w.role != Role::velocity) throw std::invalid_argument("helmholtz_project: velocity field required");
  Lattice rhs = mac_divergence(w);
  // Remove the (normally zero) incompatible mean so the Neumann solve is well posed.
  double mean = 0.0;
  for (int k = 0; k < rhs.n[2]; ++k)
    for (int j = 0; j < rhs.n[1]; ++j)
      for (int i = 0; i < rhs.n[0]; ++i) mean += rhs.at(i, j, k);
  mean /= static_cast<double>(rhs.size());
  for (int k = 0; k < rhs.n[2]; ++k)
    for (int j = 0; j < rhs.n[1]; ++j)
      for (int i = 0; i < rhs.n[0]; ++i) rhs.at(i, j, k) -= mean;

  const Lattice q = spectral::poisson_centers(w.grid, rhs);
  ProjectionResult res{w, face_gradient(w.grid, q)};
  res.v -= res.grad_p;
  res.v.sync_ghosts();
  const double div = divergence_norm(res.v);
  if (!(div <= tol))
    throw SolverError("helmholtz_project: projected divergence above tolerance", div);
  return res;
}

}  // namespace mrlab
