#pragma once
// Uniform tensor grids (1-D and 2-D) carrying nodal density values.  Each
// node owns a cell of volume prod(dx), so integrals are plain weighted sums
// and mass is sum(values) * cell_volume.

#include <functional>
#include <vector>

#include "nibec/linalg.hpp"

namespace nibec {

struct GridSpec {
  int dim = 1;
  Vec lo, hi;
  std::array<int, 2> n = {2, 2};  // nodes per axis

  GridSpec() = default;
  GridSpec(double lo1, double hi1, int n1);
  GridSpec(double lo1, double hi1, int n1, double lo2, double hi2, int n2);

  double dx(int axis) const {
    return (hi[axis] - lo[axis]) / (n[static_cast<size_t>(axis)] - 1);
  }
  double cell_volume() const {
    double v = 1;
    for (int a = 0; a < dim; ++a) v *= dx(a);
    return v;
  }
  int node_count() const {
    int c = 1;
    for (int a = 0; a < dim; ++a) c *= n[static_cast<size_t>(a)];
    return c;
  }
  int index(int i, int j = 0) const {
    return dim == 1 ? i : i * n[1] + j;
  }
  Vec node(int i, int j = 0) const {
    Vec x(dim);
    x[0] = lo[0] + i * dx(0);
    if (dim == 2) x[1] = lo[1] + j * dx(1);
    return x;
  }
  Vec node_flat(int idx) const {
    return dim == 1 ? node(idx) : node(idx / n[1], idx % n[1]);
  }
  bool same_as(const GridSpec& o) const;
};

struct GridDensity {
  GridSpec spec;
  std::vector<double> values;  // nodal, >= 0
  double boundary_mass_fraction = 0.0;
  bool boundary_mass_warning = false;

  double mass() const;
};

// Samples a nonnegative function at the nodes and normalizes to unit mass.
// Records which fraction of the (pre-normalization) mass sat on the outermost
// node layer and warns above `warn_threshold`.
GridDensity project_density(const GridSpec& spec,
                            const std::function<double(const Vec&)>& f,
                            double warn_threshold = 1e-8);

// Multilinear interpolation.  Points outside the box are clamped to the
// boundary; *clamped is incremented when that happens (pass nullptr to ignore).
double interpolate(const GridDensity& g, const Vec& x, long* clamped = nullptr);

// Nodal gradient of a grid function: centred differences inside, one-sided
// second-order at the boundary.  Result is node-major, dim entries per node.
std::vector<double> nodal_gradient(const GridSpec& spec,
                                   const std::vector<double>& values);

}  // namespace nibec
