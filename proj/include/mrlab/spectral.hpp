#pragma once

#include <complex>
#include <vector>

#include "mrlab/field.hpp"

namespace mrlab {
namespace spectral {

using cplx = std::complex<double>;

/// In-place FFT of length n (power of two: radix-2; otherwise a direct DFT,
/// which is perfectly adequate at desk-scale line lengths).
inline void transform_line(std::vector<cplx>& line, bool inverse) {
  const std::size_t n = line.size();
  if (n <= 1) return;
  const bool pow2 = (n & (n - 1)) == 0;
  if (pow2) {
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(line[i], line[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
      const cplx wl(std::cos(ang), std::sin(ang));
      for (std::size_t i = 0; i < n; i += len) {
        cplx w(1.0, 0.0);
        for (std::size_t k = 0; k < len / 2; ++k) {
          const cplx u = line[i + k];
          const cplx v = line[i + k + len / 2] * w;
          line[i + k] = u + v;
          line[i + k + len / 2] = u - v;
          w *= wl;
        }
      }
    }
  } else {
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    const double sgn = inverse ? 2.0 : -2.0;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) {
        const double ang = sgn * M_PI * static_cast<double>(k * j % n) / static_cast<double>(n);
        out[k] += line[j] * cplx(std::cos(ang), std::sin(ang));
      }
    line.swap(out);
  }
  if (inverse)
    for (auto& v : line) v /= static_cast<double>(n);
}

/// Dense complex workspace with the physical extents of one lattice.
struct Buffer {
  std::array<int, 3> n{1, 1, 1};
  std::vector<cplx> a;
  void resize(const std::array<int, 3>& ext) {
    n = ext;
    a.assign(static_cast<std::size_t>(n[0]) * n[1] * n[2], cplx(0.0, 0.0));
  }
  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * n[1] + j) * n[0] + i;
  }
  cplx& at(int i, int j, int k) { return a[idx(i, j, k)]; }
};

inline void transform_axis(Buffer& b, int axis, bool inverse) {
  const int n = b.n[axis];
  if (n <= 1) return;
  std::vector<cplx> line(n);
  const int u = axis == 0 ? 1 : 0;
  const int v = axis == 2 ? 1 : 2;
  for (int q = 0; q < b.n[v]; ++q)
    for (int r = 0; r < b.n[u]; ++r) {
      int iv[3];
      iv[u] = r;
      iv[v] = q;
      for (int t = 0; t < n; ++t) {
        iv[axis] = t;
        line[t] = b.at(iv[0], iv[1], iv[2]);
      }
      transform_line(line, inverse);
      for (int t = 0; t < n; ++t) {
        iv[axis] = t;
        b.at(iv[0], iv[1], iv[2]) = line[t];
      }
    }
}

/// Symbol of the negative 1D second-difference operator, -(f(i+1)-2f+f(i-1))/h^2,
/// for wavenumber k on n periodic samples.
inline double neg_lap_symbol(int k, int n, double h) {
  const double s = std::sin(M_PI * static_cast<double>(k) / static_cast<double>(n));
  return 4.0 * s * s / (h * h);
}

/// Thomas solve for a tridiagonal system with real coefficient arrays and a
/// complex right-hand side (overwritten with the solution).
inline void tridiag_solve(std::vector<double> lower, std::vector<double> diag,
                          std::vector<double> upper, std::vector<cplx>& rhs) {
  const int n = static_cast<int>(diag.size());
  for (int i = 1; i < n; ++i) {
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

enum class LineBc : std::uint8_t {
  dirichlet_ends,  // sample ON the wall pinned to zero (normal velocity faces)
  mirror_odd,      // centered samples, ghost = -interior (no-slip tangential)
  mirror_even      // centered samples, ghost = +interior (pure-slip / Neumann)
};

/// Solves (shift + lambda_perp + gamma (-Delta_1d)) q = r along one wall axis
/// for every transverse mode; `ends` picks the discrete closure per side.
/// Caller guarantees the system is nonsingular or handles the singular mode.
struct WallLine {
  int n = 0;
  double h = 1.0;
  LineBc lo = LineBc::mirror_even;
  LineBc hi = LineBc::mirror_even;
};

inline void wall_line_solve(const WallLine& wl, double shift, double gamma, std::vector<cplx>& rhs,
                            bool pin_first) {
  const int n = wl.n;
  const double g = gamma / (wl.h * wl.h);
  std::vector<double> lower(n, -g), diag(n, shift + 2.0 * g), upper(n, -g);
  auto close = [&](int row, LineBc bc) {
    if (bc == LineBc::mirror_odd)
      diag[row] = shift + 3.0 * g;
    else if (bc == LineBc::mirror_even)
      diag[row] = shift + 1.0 * g;
    // dirichlet_ends: row sits one off the wall and simply loses a neighbor,
    // so the default coefficients already apply (the wall value is zero).
  };
  close(0, wl.lo);
  close(n - 1, wl.hi);
  lower[0] = 0.0;
  upper[n - 1] = 0.0;
  if (pin_first) {
    diag[0] = 1.0;
    upper[0] = 0.0;
    rhs[0] = cplx(0.0, 0.0);
  }
  tridiag_solve(std::move(lower), std::move(diag), std::move(upper), rhs);
}

/// Direct solve of (shift + gamma (-Delta_h)) w = rhs on one lattice whose
/// wall closure along `wall_axis` is described by `wl` (wall_axis = -1 for
/// the all-periodic case).  With shift = 0 the operator is the (negative)
/// Poisson operator and the caller must ask for the singular-mode pin.
inline void constant_coefficient_solve(const GridSpec& grid, Lattice& f, double shift, double gamma,
                                       int wall_axis, const WallLine& wl, bool zero_mean) {
  Buffer b;
  std::array<int, 3> ext{f.n[0], f.n[1], f.n[2]};
  b.resize(ext);
  for (int k = 0; k < f.n[2]; ++k)
    for (int j = 0; j < f.n[1]; ++j)
      for (int i = 0; i < f.n[0]; ++i) b.at(i, j, k) = cplx(f.at(i, j, k), 0.0);

  for (int a = 0; a < grid.dim; ++a)
    if (a != wall_axis) transform_axis(b, a, false);

  if (wall_axis < 0) {
    for (int k = 0; k < b.n[2]; ++k)
      for (int j = 0; j < b.n[1]; ++j)
        for (int i = 0; i < b.n[0]; ++i) {
          double sym = shift;
          const int kv[3] = {i, j, k};
          for (int a = 0; a < grid.dim; ++a) sym += gamma * neg_lap_symbol(kv[a], b.n[a], grid.spacing(a));
          cplx& v = b.at(i, j, k);
          if (sym == 0.0)
            v = cplx(0.0, 0.0);  // singular constant mode: pinned (zero mean)
          else
            v /= sym;
        }
  } else {
    std::vector<cplx> line(wl.n);
    const int u = wall_axis == 0 ? 1 : 0;
    const int v = wall_axis == 2 ? 1 : 2;
    for (int q = 0; q < b.n[v]; ++q)
      for (int r = 0; r < b.n[u]; ++r) {
        int iv[3];
        iv[u] = r;
        iv[v] = q;
        double perp = shift;
        for (int a = 0; a < grid.dim; ++a)
          if (a != wall_axis) perp += gamma * neg_lap_symbol(a == u ? r : q, b.n[a], grid.spacing(a));
        for (int t = 0; t < wl.n; ++t) {
          iv[wall_axis] = t;
          line[t] = b.at(iv[0], iv[1], iv[2]);
        }
        const bool singular = (perp == 0.0) && wl.lo == LineBc::mirror_even &&
                              wl.hi == LineBc::mirror_even && shift == 0.0;
        wall_line_solve({wl.n, wl.h, wl.lo, wl.hi}, perp, gamma, line, singular);
        for (int t = 0; t < wl.n; ++t) {
          iv[wall_axis] = t;
          b.at(iv[0], iv[1], iv[2]) = line[t];
        }
      }
  }

  for (int a = 0; a < grid.dim; ++a)
    if (a != wall_axis) transform_axis(b, a, true);

  double mean = 0.0;
  for (int k = 0; k < f.n[2]; ++k)
    for (int j = 0; j < f.n[1]; ++j)
      for (int i = 0; i < f.n[0]; ++i) {
        f.at(i, j, k) = b.at(i, j, k).real();
        mean += f.at(i, j, k);
      }
  if (zero_mean) {
    mean /= static_cast<double>(f.size());
    for (int k = 0; k < f.n[2]; ++k)
      for (int j = 0; j < f.n[1]; ++j)
        for (int i = 0; i < f.n[0]; ++i) f.at(i, j, k) -= mean;
  }
}

inline int single_wall_axis(const GridSpec& grid) {
  int wall_axis = -1;
  for (int a = 0; a < grid.dim; ++a)
    if (grid.wall(a)) {
      if (wall_axis >= 0)
        throw std::invalid_argument("spectral solver: at most one wall axis is supported");
      wall_axis = a;
    }
  return wall_axis;
}

/// Cell-centered Poisson solve Delta q = rhs with tag-matching closure
/// (periodic / homogeneous Neumann); returns the zero-mean solution.
inline Lattice poisson_centers(const GridSpec& grid, const Lattice& rhs) {
  const int wall_axis = single_wall_axis(grid);
  Lattice q = rhs;
  // Delta q = rhs  <=>  (0 + 1 * (-Delta)) q = -rhs.
  for (auto& v : q.data) v = -v;
  WallLine wl;
  if (wall_axis >= 0)
    wl = {grid.n_cells[wall_axis], grid.spacing(wall_axis), LineBc::mirror_even, LineBc::mirror_even};
  constant_coefficient_solve(grid, q, 0.0, 1.0, wall_axis, wl, true);
  return q;
}

/// Componentwise solve of (I + gamma (-Delta_h)) w = rhs for a velocity
/// field, honoring each component's staggered closure on the wall axis.
/// This is the constant-coefficient preconditioner of the shifted solves.
inline void helmholtz_velocity_solve(Field& w, double gamma) {
  const GridSpec& grid = w.grid;
  const int wall_axis = single_wall_axis(grid);
  for (int c = 0; c < w.n_comps(); ++c) {
    Lattice& L = w.comps[c];
    WallLine wl;
    if (wall_axis >= 0) {
      wl.h = grid.spacing(wall_axis);
      if (c == wall_axis) {
        // Normal component: unknowns strictly between the pinned wall faces.
        wl.n = L.n[wall_axis] - 2;
        wl.lo = wl.hi = LineBc::dirichlet_ends;
        // Copy interior rows into a temporary lattice of reduced extent.
        Lattice t;
        t.n = L.n;
        t.n[wall_axis] = wl.n;
        t.allocate();
        for (int k = 0; k < t.n[2]; ++k)
          for (int j = 0; j < t.n[1]; ++j)
            for (int i = 0; i < t.n[0]; ++i) {
              int s[3] = {i, j, k};
              s[wall_axis] += 1;
              t.at(i, j, k) = L.at(s[0], s[1], s[2]);
            }
        constant_coefficient_solve(grid, t, 1.0, gamma, wall_axis, wl, false);
        for (int k = 0; k < t.n[2]; ++k)
          for (int j = 0; j < t.n[1]; ++j)
            for (int i = 0; i < t.n[0]; ++i) {
              int s[3] = {i, j, k};
              s[wall_axis] += 1;
              L.at(s[0], s[1], s[2]) = t.at(i, j, k);
            }
        // Wall faces stay at their (zero) boundary values.
        for (int k = 0; k < L.n[2]; ++k)
          for (int j = 0; j < L.n[1]; ++j)
            for (int i = 0; i < L.n[0]; ++i) {
              const int s = wall_axis == 0 ? i : wall_axis == 1 ? j : k;
              if (s == 0 || s == L.n[wall_axis] - 1) L.at(i, j, k) = 0.0;
            }
        continue;
      }
      wl.n = L.n[wall_axis];
      wl.lo = grid.bc[wall_axis][0] == Bc::no_slip ? LineBc::mirror_odd : LineBc::mirror_even;
      wl.hi = grid.bc[wall_axis][1] == Bc::no_slip ? LineBc::mirror_odd : LineBc::mirror_even;
    }
    constant_coefficient_solve(grid, L, 1.0, gamma, wall_axis, wl, false);
  }
  w.sync_ghosts();
}

}  // namespace spectral
}  // namespace mrlab
