#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrlab/core.hpp"
#include "mrlab/field.hpp"

namespace mrlab {

// ---------------------------------------------------------------------------
// Difference stencils.  Norm evaluations are pure functions of the physical
// samples: periodic axes wrap by index arithmetic, wall axes switch to
// one-sided second-order stencils at the ends.  Stored ghosts are never read,
// so a norm does not depend on whether boundary closure has been applied.
// ---------------------------------------------------------------------------

namespace detail {

inline int wrap_index(int i, int n) { return i >= n ? i - n : (i < 0 ? i + n : i); }

template <class Get>
inline double first_diff_1d(const Get& f, int i, int n, bool wrap, double h) {
  if (wrap || (i > 0 && i < n - 1)) {
    const int ip = wrap ? wrap_index(i + 1, n) : i + 1;
    const int im = wrap ? wrap_index(i - 1, n) : i - 1;
    return (f(ip) - f(im)) / (2.0 * h);
  }
  if (i == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
  return (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
}

template <class Get>
inline double second_diff_1d(const Get& f, int i, int n, bool wrap, double h) {
  const double h2 = h * h;
  if (wrap || (i > 0 && i < n - 1)) {
    const int ip = wrap ? wrap_index(i + 1, n) : i + 1;
    const int im = wrap ? wrap_index(i - 1, n) : i - 1;
    return (f(ip) - 2.0 * f(i) + f(im)) / h2;
  }
  if (i == 0) return (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2;
  return (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / h2;
}

template <int Order>
inline Lattice difference(const Lattice& src, const GridSpec& grid, int axis) {
  Lattice out = src;
  const int n = src.n[axis];
  const bool wrap = grid.periodic(axis);
  const double h = grid.spacing(axis);
  for (int k = 0; k < src.n[2]; ++k)
    for (int j = 0; j < src.n[1]; ++j)
      for (int i = 0; i < src.n[0]; ++i) {
        auto line = [&](int t) {
          return axis == 0 ? src.at(t, j, k) : axis == 1 ? src.at(i, t, k) : src.at(i, j, t);
        };
        const int pos = axis == 0 ? i : axis == 1 ? j : k;
        out.at(i, j, k) = Order == 1 ? first_diff_1d(line, pos, n, wrap, h)
                                     : second_diff_1d(line, pos, n, wrap, h);
      }
  return out;
}

inline double lp_psum(const Lattice& L, const PowerP& pp) {
  double s = 0.0;
  for (int k = 0; k < L.n[2]; ++k)
    for (int j = 0; j < L.n[1]; ++j) {
      const double* row = &L.data[L.index(0, j, k)];
      for (int i = 0; i < L.n[0]; ++i) s += pp(row[i]);
    }
  return s;
}

// --- Gagliardo double sum -------------------------------------------------
//
// For a sample set g the seminorm contribution is
//   sum_{x != y} |g(x) - g(y)|^p / |x-y|^q * w_x w_y,   q = d + s p = d + p - 2,
// organized as a loop over index offsets delta with an inner correlation sum.
// The offset loop exploits T(delta) = T(-delta) to halve the work and runs in
// fixed-size chunks so the reduction order (and hence the bits) never depends
// on the thread budget.

struct PowAbs2 { double operator()(double x) const { return x * x; } };
struct PowAbs4 { double operator()(double x) const { double a = x * x; return a * a; } };
struct PowAbs5 { double operator()(double x) const { double a = std::fabs(x), a2 = a * a; return a2 * a2 * a; } };
struct PowAbs6 { double operator()(double x) const { double a = x * x; return a * a * a; } };
struct PowAbsGen {
  double p;
  double operator()(double x) const { return std::pow(std::fabs(x), p); }
};

struct OffsetAxis {
  int m = 1;        // physical extent
  bool wrap = true;
  long ext = 1;     // enumeration extent: m (wrap) or 2m-1 (clipped)
  double h = 0.0;
};

// Correlation sum over all valid x of |g(x) - g(x+delta)|^p.
template <class Pw>
inline double shifted_psum(const Lattice& g, const int d[3], const OffsetAxis ax[3], const Pw& pw) {
  // Per-axis segments: (start, length, shift applied to the source index).
  struct Seg { int start, len, shift; };
  Seg segs[3][2];
  int nseg[3];
  for (int a = 0; a < 3; ++a) {
    const int m = ax[a].m, dd = d[a];
    if (ax[a].wrap) {
      if (dd == 0) {
        segs[a][0] = {0, m, 0};
        nseg[a] = 1;
      } else {
        segs[a][0] = {0, m - dd, dd};
        segs[a][1] = {m - dd, dd, dd - m};
        nseg[a] = 2;
      }
    } else {
      const int lo = std::max(0, -dd), hi = std::min(m, m - dd);
      segs[a][0] = {lo, hi - lo, dd};
      nseg[a] = (hi > lo) ? 1 : 0;
      if (nseg[a] == 0) return 0.0;
    }
  }
  double sum = 0.0;
  for (int zs = 0; zs < nseg[2]; ++zs)
    for (int z = segs[2][zs].start; z < segs[2][zs].start + segs[2][zs].len; ++z) {
      const int sz = z + segs[2][zs].shift;
      for (int ys = 0; ys < nseg[1]; ++ys)
        for (int y = segs[1][ys].start; y < segs[1][ys].start + segs[1][ys].len; ++y) {
          const int sy = y + segs[1][ys].shift;
          for (int xs = 0; xs < nseg[0]; ++xs) {
            const Seg& s = segs[0][xs];
            const double* pa = &g.data[g.index(s.start, y, z)];
            const double* pb = &g.data[g.index(s.start + s.shift, sy, sz)];
            double local = 0.0;
            for (int i = 0; i < s.len; ++i) local += pw(pa[i] - pb[i]);
            sum += local;
          }
        }
    }
  return sum;
}

template <class Pw>
inline double gagliardo_psum_impl(const Lattice& g, const GridSpec& grid, double q, const Pw& pw) {
  OffsetAxis ax[3];
  for (int a = 0; a < 3; ++a) {
    ax[a].m = g.n[a];
    ax[a].wrap = a >= grid.dim ? true : grid.periodic(a);
    ax[a].ext = (ax[a].wrap || a >= grid.dim) ? ax[a].m : 2L * ax[a].m - 1;
    ax[a].h = a < grid.dim ? grid.spacing(a) : 0.0;
  }
  const long total = ax[0].ext * ax[1].ext * ax[2].ext;
  const std::size_t n_chunks = 64;
  std::vector<double> partial(n_chunks, 0.0);
  parallel_chunks(static_cast<std::size_t>(total), n_chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    double local = 0.0;
    for (std::size_t t = b; t < e; ++t) {
      long rem = static_cast<long>(t);
      int d[3], tt[3];
      for (int a = 0; a < 3; ++a) {
        tt[a] = static_cast<int>(rem % ax[a].ext);
        rem /= ax[a].ext;
        d[a] = ax[a].wrap ? tt[a] : tt[a] - (ax[a].m - 1);
      }
      if (d[0] == 0 && d[1] == 0 && d[2] == 0) continue;
      // Pair delta with -delta; keep the lexicographically smaller index.
      long neg = 0;
      for (int a = 2; a >= 0; --a) {
        const int nt = ax[a].wrap ? (d[a] == 0 ? 0 : ax[a].m - d[a]) : (ax[a].ext - 1 - tt[a]);
        neg = neg * ax[a].ext + nt;
      }
      // neg was composed in reversed axis order to match the linear index.
      long self = 0;
      for (int a = 2; a >= 0; --a) self = self * ax[a].ext + tt[a];
      if (neg < self) continue;
      const double w = (neg == self) ? 1.0 : 2.0;
      double r2 = 0.0;
      for (int a = 0; a < grid.dim; ++a) {
        const double pd = (ax[a].wrap ? std::min(d[a], ax[a].m - d[a]) : std::abs(d[a])) * ax[a].h;
        r2 += pd * pd;
      }
      local += w * std::pow(r2, -0.5 * q) * shifted_psum(g, d, ax, pw);
    }
    partial[c] += local;
  });
  double sum = 0.0;
  for (double v : partial) sum += v;
  return sum;
}

inline double gagliardo_psum(const Lattice& g, const GridSpec& grid, double q, double p) {
  const PowerP pp(p);
  if (pp.integral) {
    switch (pp.ip) {
      case 2: return gagliardo_psum_impl(g, grid, q, PowAbs2{});
      case 4: return gagliardo_psum_impl(g, grid, q, PowAbs4{});
      case 5: return gagliardo_psum_impl(g, grid, q, PowAbs5{});
      case 6: return gagliardo_psum_impl(g, grid, q, PowAbs6{});
      default: break;
    }
  }
  return gagliardo_psum_impl(g, grid, q, PowAbsGen{p});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Norms.
// ---------------------------------------------------------------------------

/// Cell-volume-weighted discrete L^p norm (all components).
namespace detail {
/// Sums of |x|^p are non-negative, so any NaN or overflow in the samples
/// survives into the final value; one end check implements the invalid-field
/// error without a separate scan.
inline double checked_norm(double value, const char* who) {
  if (!std::isfinite(value))
    throw std::invalid_argument(std::string(who) + ": field contains non-finite values");
  return value;
}
}  // namespace detail

inline double x0_norm(const Field& u) {
  const PowerP pp(u.grid.p);
  double s = 0.0;
  for (const auto& c : u.comps) s += detail::lp_psum(c, pp);
  return detail::checked_norm(std::pow(s * u.grid.cell_volume(), 1.0 / u.grid.p), "x0_norm");
}

/// Discrete H^2_p norm: L^p sums of the samples, all first differences and
/// all second differences (multi-index pairs a <= b), one p-th root overall.
inline double x1_norm(const Field& u) {
  const PowerP pp(u.grid.p);
  double s = 0.0;
  for (const auto& c : u.comps) {
    s += detail::lp_psum(c, pp);
    for (int a = 0; a < u.grid.dim; ++a) {
      const Lattice da = detail::difference<1>(c, u.grid, a);
      s += detail::lp_psum(da, pp);
      s += detail::lp_psum(detail::difference<2>(c, u.grid, a), pp);
      for (int b = a + 1; b < u.grid.dim; ++b)
        s += detail::lp_psum(detail::difference<1>(da, u.grid, b), pp);
    }
  }
  return detail::checked_norm(std::pow(s * u.grid.cell_volume(), 1.0 / u.grid.p), "x1_norm");
}

/// Trace-space surrogate (the W^{2-2/p,p} stand-in): x0 + L^p norm of the
/// first differences + Gagliardo seminorm of order s = 1-2/p of each first
/// difference, added as three separate norms.
inline double xp_norm(const Field& u) {
  const double p = u.grid.p;
  const PowerP pp(p);
  const double q = u.grid.dim + p - 2.0;  // d + s p with s = 1 - 2/p
  const double vol = u.grid.cell_volume();
  double grad = 0.0, gag = 0.0;
  for (const auto& c : u.comps)
    for (int a = 0; a < u.grid.dim; ++a) {
      const Lattice g = detail::difference<1>(c, u.grid, a);
      grad += detail::lp_psum(g, pp);
      gag += detail::gagliardo_psum(g, u.grid, q, p);
    }
  return detail::checked_norm(
      x0_norm(u) + std::pow(grad * vol, 1.0 / p) + std::pow(gag * vol * vol, 1.0 / p), "xp_norm");
}

/// Ratio xp / (x0^{1/p} x1^{1-1/p}); the discrete interpolation inequality
/// says ensembles of smooth fields keep this bounded.
inline double interpolation_check(const Field& u) {
  const double n0 = x0_norm(u);
  if (n0 == 0.0) throw std::invalid_argument("interpolation_check: zero field");
  const double n1 = x1_norm(u);
  const double p = u.grid.p;
  return xp_norm(u) / (std::pow(n0, 1.0 / p) * std::pow(n1, 1.0 - 1.0 / p));
}

/// Discrete L2 norm of the staggered divergence (face differences into cell
/// centers).  Velocity fields only.
inline double divergence_norm(const Field& u) {
  if (u.role != Role::velocity) throw std::invalid_argument("divergence_norm: velocity field required");
  const GridSpec& g = u.grid;
  double s = 0.0;
  const int nz = g.dim == 3 ? g.n_cells[2] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < g.n_cells[1]; ++j)
      for (int i = 0; i < g.n_cells[0]; ++i) {
        double div = 0.0;
        for (int c = 0; c < g.dim; ++c) {
          const Lattice& L = u.comps[c];
          int ip[3] = {i, j, k}, im[3] = {i, j, k};
          ip[c] += 1;
          if (g.periodic(c) && ip[c] == L.n[c]) ip[c] = 0;
          div += (L.at(ip[0], ip[1], ip[2]) - L.at(im[0], im[1], im[2])) / g.spacing(c);
        }
        s += div * div;
      }
  return std::sqrt(s * g.cell_volume());
}

/// The norm bundle reported per field; all entries are zero exactly when the
/// field vanishes (the ratio uses the 0-convention for the zero field).
struct NormReport {
  double x0 = 0.0;
  double x1 = 0.0;
  double xp = 0.0;
  double interpolation_ratio = 0.0;
};

inline NormReport norm_report(const Field& u) {
  NormReport r;
  r.x0 = x0_norm(u);
  if (r.x0 == 0.0) return r;
  r.x1 = x1_norm(u);
  r.xp = xp_norm(u);
  const double p = u.grid.p;
  r.interpolation_ratio = r.xp / (std::pow(r.x0, 1.0 / p) * std::pow(r.x1, 1.0 - 1.0 / p));
  return r;
}

}  // namespace mrlab
