#include "nibec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nibec {

GridSpec::GridSpec(double lo1, double hi1, int n1) : dim(1), lo(1), hi(1) {
  lo[0] = lo1;
  hi[0] = hi1;
  n = {n1, 1};
  if (n1 < 2 || !(hi1 > lo1)) throw std::invalid_argument("GridSpec: bad axis");
}

GridSpec::GridSpec(double lo1, double hi1, int n1, double lo2, double hi2, int n2)
    : dim(2), lo(2), hi(2) {
  lo[0] = lo1;
  hi[0] = hi1;
  lo[1] = lo2;
  hi[1] = hi2;
  n = {n1, n2};
  if (n1 < 2 || n2 < 2 || !(hi1 > lo1) || !(hi2 > lo2))
    throw std::invalid_argument("GridSpec: bad axis");
}

bool GridSpec::same_as(const GridSpec& o) const {
  if (dim != o.dim || n != o.n) return false;
  for (int a = 0; a < dim; ++a)
    if (lo[a] != o.lo[a] || hi[a] != o.hi[a]) return false;
  return true;
}

double GridDensity::mass() const {
  double s = 0;
  for (double v : values) s += v;
  return s * spec.cell_volume();
}

GridDensity project_density(const GridSpec& spec,
                            const std::function<double(const Vec&)>& f,
                            double warn_threshold) {
  GridDensity g;
  g.spec = spec;
  g.values.resize(static_cast<size_t>(spec.node_count()));
  double total = 0, boundary = 0;
  const int n0 = spec.n[0], n1 = spec.dim == 2 ? spec.n[1] : 1;
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      const double v = f(spec.node(i, j));
      if (!(v >= 0) || !std::isfinite(v))
        throw std::invalid_argument("project_density: negative or non-finite value");
      g.values[static_cast<size_t>(spec.index(i, j))] = v;
      total += v;
      const bool on_boundary = i == 0 || i == n0 - 1 ||
                               (spec.dim == 2 && (j == 0 || j == n1 - 1));
      if (on_boundary) boundary += v;
    }
  }
  if (total <= 0) throw std::invalid_argument("project_density: zero mass");
  g.boundary_mass_fraction = boundary / total;
  g.boundary_mass_warning = g.boundary_mass_fraction > warn_threshold;
  const double z = total * spec.cell_volume();
  for (double& v : g.values) v /= z;
  return g;
}

double interpolate(const GridDensity& g, const Vec& x, long* clamped) {
  const GridSpec& s = g.spec;
  double t[2] = {0.0, 0.0};
  int base[2] = {0, 0};
  bool hit_clamp = false;
  for (int a = 0; a < s.dim; ++a) {
    double xa = x[a];
    if (xa < s.lo[a]) {
      xa = s.lo[a];
      hit_clamp = true;
    }
    if (xa > s.hi[a]) {
      xa = s.hi[a];
      hit_clamp = true;
    }
    const double u = (xa - s.lo[a]) / s.dx(a);
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i, 0, s.n[static_cast<size_t>(a)] - 2);
    base[a] = i;
    t[a] = u - i;
  }
  if (hit_clamp && clamped) ++*clamped;
  if (s.dim == 1) {
    const double v0 = g.values[static_cast<size_t>(base[0])];
    const double v1 = g.values[static_cast<size_t>(base[0] + 1)];
    return v0 + t[0] * (v1 - v0);
  }
  const auto at = [&](int i, int j) {
    return g.values[static_cast<size_t>(s.index(i, j))];
  };
  const double v00 = at(base[0], base[1]), v10 = at(base[0] + 1, base[1]);
  const double v01 = at(base[0], base[1] + 1), v11 = at(base[0] + 1, base[1] + 1);
  const double a0 = v00 + t[0] * (v10 - v00);
  const double a1 = v01 + t[0] * (v11 - v01);
  return a0 + t[1] * (a1 - a0);
}

std::vector<double> nodal_gradient(const GridSpec& spec,
                                   const std::vector<double>& values) {
  const int n0 = spec.n[0], n1 = spec.dim == 2 ? spec.n[1] : 1;
  std::vector<double> grad(static_cast<size_t>(spec.node_count() * spec.dim));
  const auto val = [&](int i, int j) {
    return values[static_cast<size_t>(spec.index(i, j))];
  };
  // Second-order one-sided stencil at the edges: (-3f0 + 4f1 - f2) / (2h).
  const auto d_axis = [&](int i, int j, int axis) {
    const int k = axis == 0 ? i : j;
    const int nk = axis == 0 ? n0 : n1;
    const double h = spec.dx(axis);
    const auto shift = [&](int dk) {
      return axis == 0 ? val(i + dk, j) : val(i, j + dk);
    };
    if (nk < 3) return (shift(k == 0 ? 1 : 0) - shift(k == 0 ? 0 : -1)) / h;
    if (k == 0) return (-3.0 * shift(0) + 4.0 * shift(1) - shift(2)) / (2.0 * h);
    if (k == nk - 1)
      return (3.0 * shift(0) - 4.0 * shift(-1) + shift(-2)) / (2.0 * h);
    return (shift(1) - shift(-1)) / (2.0 * h);
  };
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      const int idx = spec.index(i, j);
      for (int a = 0; a < spec.dim; ++a)
        grad[static_cast<size_t>(idx * spec.dim + a)] = d_axis(i, j, a);
    }
  return grad;
}

}  // namespace nibec
