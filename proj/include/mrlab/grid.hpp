#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mrlab {

/// Boundary tag for one side of one axis.  Periodic tags always come in
/// axis-wise pairs; no_slip clamps every velocity component at the wall,
/// pure_slip clamps the normal component and the tangential stress.
enum class Bc : std::uint8_t { periodic, no_slip, pure_slip };

inline const char* to_string(Bc b) {
  switch (b) {
    case Bc::periodic: return "periodic";
    case Bc::no_slip: return "no_slip";
    default: return "pure_slip";
  }
}

/// Uniform tensor-product grid: cell counts, box lengths, per-side boundary
/// tags and the Lebesgue exponent p used by every norm on this grid.
struct GridSpec {
  int dim = 2;
  std::array<int, 3> n_cells{0, 0, 1};
  std::array<double, 3> lengths{0.0, 0.0, 1.0};
  std::array<std::array<Bc, 2>, 3> bc{{{Bc::periodic, Bc::periodic},
                                       {Bc::periodic, Bc::periodic},
                                       {Bc::periodic, Bc::periodic}}};
  double p = 5.0;

  double spacing(int axis) const { return lengths[axis] / n_cells[axis]; }
  bool periodic(int axis) const { return bc[axis][0] == Bc::periodic; }
  bool wall(int axis) const { return !periodic(axis); }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= spacing(a);
    return v;
  }

  void validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("GridSpec: dim must be 2 or 3");
    for (int a = 0; a < dim; ++a) {
      if (n_cells[a] < 4)
        throw std::invalid_argument("GridSpec: grid too coarse for second differences (n_cells < 4)");
      if (!(lengths[a] > 0.0)) throw std::invalid_argument("GridSpec: lengths must be positive");
      const bool p0 = bc[a][0] == Bc::periodic, p1 = bc[a][1] == Bc::periodic;
      if (p0 != p1)
        throw std::invalid_argument("GridSpec: periodic tags must pair up on axis " + std::to_string(a));
    }
    if (dim == 2 && !(p > 4.0)) throw std::invalid_argument("GridSpec: dim 2 requires p > 4");
    if (dim == 3 && !(p > 5.0)) throw std::invalid_argument("GridSpec: dim 3 requires p > 5");
  }
};

/// All axes periodic (the torus used by the verification studies).
inline GridSpec periodic_box(int dim, int n, double length = 2.0 * M_PI, double p = 0.0) {
  GridSpec g;
  g.dim = dim;
  g.p = (p > 0.0) ? p : (dim == 2 ? 5.0 : 6.0);
  for (int a = 0; a < dim; ++a) {
    g.n_cells[a] = n;
    g.lengths[a] = length;
  }
  g.validate();
  return g;
}

/// Channel preset: axis 0 (and axis 2 in 3D) periodic; axis 1 walls with
/// no_slip at y = 0 and pure_slip at y = L.
inline GridSpec channel(int dim, int n, double length = 2.0 * M_PI, double p = 0.0) {
  GridSpec g = periodic_box(dim, n, length, p);
  g.bc[1] = {Bc::no_slip, Bc::pure_slip};
  g.validate();
  return g;
}

/// All-wall box (no periodic seam on any axis); handy for exactness checks
/// on linear fields.
inline GridSpec cavity(int dim, int n, double length = 1.0, double p = 0.0) {
  GridSpec g = periodic_box(dim, n, length, p);
  for (int a = 0; a < dim; ++a) g.bc[a] = {Bc::no_slip, Bc::no_slip};
  g.validate();
  return g;
}

}  // namespace mrlab
