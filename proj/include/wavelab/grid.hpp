#pragma once

#include <wavelab/coefficients.hpp>
#include <wavelab/types.hpp>

#include <cmath>

namespace wavelab {

enum class GridKind { Radial, Cartesian1D };

/// Surface area of the unit sphere S^{n-1}; the n=1 value 2 counts both half-lines.
inline Scalar sphere_area(int n) {
  if (n < 1) throw std::invalid_argument("sphere_area: n >= 1 required");
  return 2 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
}

/// Uniform node ladder r_i = i*dx on [0, r_max]; node 0 is the symmetry point.
struct Grid {
  GridKind kind = GridKind::Radial;
  int dim = 3;
  Index m = 0;
  Scalar r_max = 0, dx = 0;

  static Grid radial(int dim, Scalar r_max, Index m) {
    if (dim < 1) throw std::invalid_argument("grid: dim >= 1 required");
    if (m < 16) throw std::invalid_argument("grid: at least 16 nodes required");
    if (!(r_max > 0)) throw std::invalid_argument("grid: r_max must be positive");
    Grid g;
    g.kind = dim == 1 ? GridKind::Cartesian1D : GridKind::Radial;
    g.dim = dim;
    g.m = m;
    g.r_max = r_max;
    g.dx = r_max / Scalar(m - 1);
    return g;
  }
  static Grid cartesian1d(Scalar r_max, Index m) { return radial(1, r_max, m); }

  Scalar r(Index i) const { return dx * Scalar(i); }
  ArrayX radii() const {  // bitwise-identical to r(i) node by node
    ArrayX out(m);
    for (Index i = 0; i < m; ++i) out[i] = r(i);
    return out;
  }
};

/// Samples the coefficient triple onto a grid together with the geometric factors
/// of the conservative discrete operator: face areas r_{i+1/2}^{n-1}, exact shell
/// volumes V_i = (r_{i+1/2}^n - r_{i-1/2}^n)/n, and the matching quadrature weights
/// w_i = |S^{n-1}| V_i (these are the summation-by-parts weights of the operator).
struct DiscreteField {
  ArrayX a, c, b_node;   // node samples (m)
  ArrayX b_face;         // face samples at r_{i+1/2} (m-1)
  ArrayX face_area;      // r_{i+1/2}^{n-1} (m-1)
  ArrayX cell_volume;    // per-node shell volume (m); half cells at the ends
  ArrayX quad_weight;    // sphere_area(n) * cell_volume

  DiscreteField() = default;
  DiscreteField(const Grid& g, const CoefficientField& f) {
    const Index m = g.m;
    const int n = g.dim;
    a.resize(m);
    c.resize(m);
    b_node.resize(m);
    b_face.resize(m - 1);
    face_area.resize(m - 1);
    cell_volume.resize(m);
    for (Index i = 0; i < m; ++i) {
      const Scalar r = g.r(i);
      a[i] = f.a(r);
      c[i] = f.c(r);
      b_node[i] = f.b(r);
      if (!(a[i] >= 0 && b_node[i] > 0 && c[i] > 0))
        throw std::invalid_argument(
            "stiffness and mass coefficients must be positive (damping nonnegative) on the grid");
    }
    for (Index i = 0; i < m - 1; ++i) {
      const Scalar rf = (g.r(i) + g.r(i + 1)) / 2;
      b_face[i] = f.b(rf);
      face_area[i] = std::pow(rf, n - 1);
    }
    auto shell = [n](Scalar lo, Scalar hi) {
      return (std::pow(hi, n) - std::pow(lo, n)) / Scalar(n);
    };
    const Scalar h = g.dx / 2;
    cell_volume[0] = shell(0, h);
    for (Index i = 1; i < m - 1; ++i) cell_volume[i] = shell(g.r(i) - h, g.r(i) + h);
    cell_volume[m - 1] = shell(g.r(m - 1) - h, g.r(m - 1));
    quad_weight = sphere_area(n) * cell_volume;
  }
};

/// Conservative flux-form discretization of div(b grad u):
///   L u_i = (F_{i+1/2} - F_{i-1/2}) / V_i,   F = r^{n-1} b (u_{i+1}-u_i)/dx,
/// with zero flux through r=0 (symmetry). Valid at nodes 0..m-2; the Dirichlet
/// boundary entry is returned as 0.
inline ArrayX apply_div_b_grad(const Grid& g, const DiscreteField& d, CRef<ArrayX> u) {
  const Index m = g.m;
  ArrayX out = ArrayX::Zero(m);
  ArrayX flux = d.face_area * d.b_face * (u.tail(m - 1) - u.head(m - 1)) / g.dx;
  out[0] = flux[0] / d.cell_volume[0];
  out.segment(1, m - 2) =
      (flux.tail(m - 2) - flux.head(m - 2)) / d.cell_volume.segment(1, m - 2);
  return out;
}

/// Centered radial derivative; 0 at the symmetry node, one-sided at the boundary.
inline ArrayX radial_gradient(const Grid& g, CRef<ArrayX> u) {
  const Index m = g.m;
  ArrayX out(m);
  out[0] = 0;
  out.segment(1, m - 2) = (u.tail(m - 2) - u.head(m - 2)) / (2 * g.dx);
  out[m - 1] = (u[m - 1] - u[m - 2]) / g.dx;
  return out;
}

/// Integral over R^n of a radial nodal profile with the operator-matched weights.
inline Scalar integrate(const DiscreteField& d, CRef<ArrayX> f) {
  return (d.quad_weight * f).sum();
}

/// FNV-1a over the sampled coefficient bytes; identifies the field in metadata.
inline std::uint64_t field_signature(const DiscreteField& d) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const ArrayX& v) {
    for (Index i = 0; i < v.size(); ++i) {
      std::uint64_t bits;
      const Scalar x = v[i];
      static_assert(sizeof(bits) == sizeof(x));
      __builtin_memcpy(&bits, &x, sizeof(bits));
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xff;
        h *= 1099511628211ull;
      }
    }
  };
  mix(d.a);
  mix(d.b_face);
  mix(d.c);
  return h;
}

}  // namespace wavelab
