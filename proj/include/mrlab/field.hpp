#pragma once

#include <array>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mrlab/grid.hpp"

namespace mrlab {

enum class Role : std::uint8_t { velocity, pressure, scalar };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::velocity: return "velocity";
    case Role::pressure: return "pressure";
    default: return "scalar";
  }
}

/// One scalar sample set on a (possibly staggered) uniform lattice.  Storage
/// is padded by one ghost layer on every axis; physical indices run over
/// [0, n) and ghost reads use -1 / n.  Arrays are always 3D with z-extent 1
/// in two dimensions, so the same index math serves both.
struct Lattice {
  std::array<int, 3> n{1, 1, 1};          // physical extents
  std::array<double, 3> off{0.5, 0.5, 0.5};  // sample offset in cells: 0 = face, 0.5 = center
  std::vector<double> data;

  void allocate() {
    data.assign(static_cast<std::size_t>(n[0] + 2) * (n[1] + 2) * (n[2] + 2), 0.0);
  }
  std::size_t padded(int a) const { return static_cast<std::size_t>(n[a] + 2); }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k + 1) * padded(1) + (j + 1)) * padded(0) + (i + 1);
  }
  double& at(int i, int j = 0, int k = 0) { return data[index(i, j, k)]; }
  double at(int i, int j = 0, int k = 0) const { return data[index(i, j, k)]; }
  std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
};

/// Staggered (MAC) field: velocity components live on the faces normal to
/// their axis, pressure and scalars at cell centers.  On wall axes the
/// normal component stores the wall faces themselves.
struct Field {
  GridSpec grid;
  Role role = Role::scalar;
  std::vector<Lattice> comps;

  static Field make(const GridSpec& g, Role role) {
    g.validate();
    Field f;
    f.grid = g;
    f.role = role;
    const int nc = (role == Role::velocity) ? g.dim : 1;
    f.comps.resize(nc);
    for (int c = 0; c < nc; ++c) {
      Lattice& L = f.comps[c];
      for (int a = 0; a < 3; ++a) {
        if (a >= g.dim) {
          L.n[a] = 1;
          L.off[a] = 0.5;
        } else if (role == Role::velocity && a == c) {
          L.n[a] = g.periodic(a) ? g.n_cells[a] : g.n_cells[a] + 1;
          L.off[a] = 0.0;
        } else {
          L.n[a] = g.n_cells[a];
          L.off[a] = 0.5;
        }
      }
      L.allocate();
    }
    return f;
  }

  int n_comps() const { return static_cast<int>(comps.size()); }
  std::size_t n_dof() const {
    std::size_t n = 0;
    for (const auto& c : comps) n += c.size();
    return n;
  }

  /// Physical coordinate of sample (i,j,k) of component c along axis a.
  double coord(int c, int a, int i) const {
    return (i + comps[c].off[a]) * grid.spacing(a);
  }

  /// Fills physical samples from fn(x, component); ghosts are then re-synced
  /// to the boundary closure (not to the analytic continuation of fn).
  void sample(const std::function<double(const std::array<double, 3>&, int)>& fn) {
    for (int c = 0; c < n_comps(); ++c) {
      Lattice& L = comps[c];
      for (int k = 0; k < L.n[2]; ++k)
        for (int j = 0; j < L.n[1]; ++j)
          for (int i = 0; i < L.n[0]; ++i) {
            std::array<double, 3> x{coord(c, 0, i), coord(c, 1, j), grid.dim == 3 ? coord(c, 2, k) : 0.0};
            L.at(i, j, k) = fn(x, c);
          }
    }
    sync_ghosts();
  }

  /// Rewrites every ghost layer from the physical data: wrap copies on
  /// periodic axes, tag-dependent mirrors on wall axes.  Axis-aligned ghost
  /// reads are valid afterwards; corner ghosts become consistent because the
  /// axis passes run over the already-extended ranges of earlier axes.
  void sync_ghosts() {
    for (int c = 0; c < n_comps(); ++c) {
      Lattice& L = comps[c];
      for (int a = 0; a < grid.dim; ++a) {
        const bool face_axis = (role == Role::velocity && a == c && grid.wall(a));
        // (source index, sign) for the low/high ghost plane.
        int src_lo, src_hi;
        double s_lo = 1.0, s_hi = 1.0;
        if (grid.periodic(a)) {
          src_lo = L.n[a] - 1;
          src_hi = 0;
        } else if (face_axis) {
          // Normal component, wall on the sample point: mirror about the wall.
          src_lo = 1;
          src_hi = L.n[a] - 2;
          s_lo = (grid.bc[a][0] == Bc::no_slip) ? 1.0 : -1.0;
          s_hi = (grid.bc[a][1] == Bc::no_slip) ? 1.0 : -1.0;
        } else {
          // Cell-centered samples: mirror about the wall between ghost and
          // first interior sample.
          src_lo = 0;
          src_hi = L.n[a] - 1;
          const bool tangential = (role == Role::velocity);
          s_lo = !tangential ? 1.0 : (grid.bc[a][0] == Bc::no_slip ? -1.0 : 1.0);
          s_hi = !tangential ? 1.0 : (grid.bc[a][1] == Bc::no_slip ? -1.0 : 1.0);
        }
        copy_plane(L, a, -1, src_lo, s_lo);
        copy_plane(L, a, L.n[a], src_hi, s_hi);
      }
    }
  }

  Field& operator+=(const Field& o) { return combine(1.0, o); }
  Field& operator-=(const Field& o) { return combine(-1.0, o); }
  Field& operator*=(double s) {
    for (auto& c : comps)
      for (auto& v : c.data) v *= s;
    return *this;
  }
  /// this += s * o over the full padded storage; ghost relations are linear,
  /// so consistency survives arithmetic.
  Field& combine(double s, const Field& o) {
    for (int c = 0; c < n_comps(); ++c) {
      auto& a = comps[c].data;
      const auto& b = o.comps[c].data;
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
    }
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

 private:
  // Copies (with sign) the ghost plane at index `dst` along axis `a` from the
  // physical plane `src`, sweeping the extended range of the other axes.
  void copy_plane(Lattice& L, int a, int dst, int src, double sign) {
    int lo[3], hi[3];
    for (int b = 0; b < 3; ++b) {
      lo[b] = -1;
      hi[b] = L.n[b] + 1;
    }
    lo[a] = dst;
    hi[a] = dst + 1;
    for (int k = lo[2]; k < hi[2]; ++k)
      for (int j = lo[1]; j < hi[1]; ++j)
        for (int i = lo[0]; i < hi[0]; ++i) {
          int si = i, sj = j, sk = k;
          (a == 0 ? si : a == 1 ? sj : sk) = src;
          L.at(i, j, k) = sign * L.at(si, sj, sk);
        }
  }
};

/// Enforces the boundary tags: zeroes the stored wall faces of the normal
/// component (v·nu = 0 under both wall tags) and re-syncs every ghost layer.
/// Idempotent; a no-op on all-periodic grids apart from the wrap refresh.
inline void apply_boundary(Field& f) {
  if (f.role == Role::velocity) {
    for (int a = 0; a < f.grid.dim; ++a) {
      if (!f.grid.wall(a)) continue;
      Lattice& L = f.comps[a];
      int lo[3] = {0, 0, 0}, hi[3] = {L.n[0], L.n[1], L.n[2]};
      for (int side = 0; side < 2; ++side) {
        int lo2[3] = {lo[0], lo[1], lo[2]}, hi2[3] = {hi[0], hi[1], hi[2]};
        lo2[a] = side == 0 ? 0 : L.n[a] - 1;
        hi2[a] = lo2[a] + 1;
        for (int k = lo2[2]; k < hi2[2]; ++k)
          for (int j = lo2[1]; j < hi2[1]; ++j)
            for (int i = lo2[0]; i < hi2[0]; ++i) L.at(i, j, k) = 0.0;
      }
    }
  }
  f.sync_ghosts();
}

/// Discrete L2 inner product over physical samples (uniform cell-volume
/// weights); the Krylov solver and the projection orthogonality check use it.
inline double dot_l2(const Field& u, const Field& v) {
  double s = 0.0;
  for (int c = 0; c < u.n_comps(); ++c) {
    const Lattice& a = u.comps[c];
    const Lattice& b = v.comps[c];
    for (int k = 0; k < a.n[2]; ++k)
      for (int j = 0; j < a.n[1]; ++j)
        for (int i = 0; i < a.n[0]; ++i) s += a.at(i, j, k) * b.at(i, j, k);
  }
  return s * u.grid.cell_volume();
}

inline double max_abs(const Field& u) {
  double m = 0.0;
  for (int c = 0; c < u.n_comps(); ++c) {
    const Lattice& a = u.comps[c];
    for (int k = 0; k < a.n[2]; ++k)
      for (int j = 0; j < a.n[1]; ++j)
        for (int i = 0; i < a.n[0]; ++i) m = std::max(m, std::fabs(a.at(i, j, k)));
  }
  return m;
}

/// d x d symmetric tensor samples at cell centers (no ghost semantics).
struct TensorField {
  GridSpec grid;
  std::array<std::array<Lattice, 3>, 3> comp;  // comp[a][b], a,b < dim
  Lattice& operator()(int a, int b) { return comp[a][b]; }
  const Lattice& operator()(int a, int b) const { return comp[a][b]; }

  static TensorField make(const GridSpec& g) {
    TensorField t;
    t.grid = g;
    for (int a = 0; a < g.dim; ++a)
      for (int b = 0; b < g.dim; ++b) {
        Lattice& L = t.comp[a][b];
        for (int ax = 0; ax < 3; ++ax) L.n[ax] = ax < g.dim ? g.n_cells[ax] : 1;
        L.allocate();
      }
    return t;
  }
};

/// Center-sampled scalar workspace with the same padded layout as Lattice.
inline Lattice center_lattice(const GridSpec& g) {
  Lattice L;
  for (int a = 0; a < 3; ++a) L.n[a] = a < g.dim ? g.n_cells[a] : 1;
  L.allocate();
  return L;
}

}  // namespace mrlab
