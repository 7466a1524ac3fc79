#include "nibec/functionals.hpp"

#include <cmath>
#include <stdexcept>

namespace nibec {

namespace {

void require_same_grid(const GridDensity& p, const GridDensity& q) {
  if (!p.spec.same_as(q.spec))
    throw std::invalid_argument("densities live on different grids");
}

bool mass_defect_flag(const GridDensity& p, const GridDensity& q) {
  return p.boundary_mass_warning || q.boundary_mass_warning ||
         std::abs(p.mass() - 1.0) > 1e-6 || std::abs(q.mass() - 1.0) > 1e-6;
}

// Rectangle sum over all nodes, plus a stride-2 coarsened sum for a
// Richardson error estimate (coarse nodes represent 2 fine nodes per axis,
// or 1 for a dangling last node when the count is even).
struct QuadSum {
  double fine = 0.0;
  double coarse = 0.0;
};

QuadSum strided_sum(const GridSpec& spec, const std::vector<double>& f) {
  QuadSum s;
  const int n0 = spec.n[0], n1 = spec.dim == 2 ? spec.n[1] : 1;
  const auto rep = [](int k, int nk) {
    // Nodes represented by coarse node k (k even): itself and k+1 if present.
    return (k + 1 < nk) ? 2.0 : 1.0;
  };
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      const double v = f[static_cast<size_t>(spec.index(i, j))];
      s.fine += v;
      if (i % 2 == 0 && j % 2 == 0) {
        double w = rep(i, n0);
        if (spec.dim == 2) w *= rep(j, n1);
        s.coarse += w * v;
      }
    }
  const double vol = spec.cell_volume();
  s.fine *= vol;
  s.coarse *= vol;
  return s;
}

ScalarResult finish(const QuadSum& s, bool infinite, bool defect) {
  ScalarResult r;
  r.infinite = infinite;
  r.mass_defect = defect;
  r.value = infinite ? std::numeric_limits<double>::infinity() : s.fine;
  r.error_estimate = infinite ? 0.0 : std::abs(s.fine - s.coarse) / 3.0;
  return r;
}

}  // namespace

ScalarResult evaluate_entropy(const EntropyGenerator& u, const GridDensity& p,
                              const GridDensity& q) {
  require_same_grid(p, q);
  const int count = p.spec.node_count();
  std::vector<double> integrand(static_cast<size_t>(count), 0.0);
  bool infinite = false;
  for (int idx = 0; idx < count; ++idx) {
    const double pi = p.values[static_cast<size_t>(idx)];
    const double qi = q.values[static_cast<size_t>(idx)];
    if (qi > 0) {
      const double r = pi / qi;
      integrand[static_cast<size_t>(idx)] = (r > 0 ? u.u(r) : u.u_at_zero) * qi;
    } else if (pi > 0) {
      if (std::isinf(u.recession_slope)) infinite = true;
      else integrand[static_cast<size_t>(idx)] = u.recession_slope * pi;
    }
  }
  return finish(strided_sum(p.spec, integrand), infinite, mass_defect_flag(p, q));
}

ScalarResult evaluate_fisher(const EntropyGenerator& u, const GridDensity& p,
                             const GridDensity& q, const DiffusionModel& model,
                             double ratio_floor) {
  require_same_grid(p, q);
  if (!u.d2u)
    throw std::invalid_argument("evaluate_fisher: generator lacks U'' (" + u.name + ")");
  if (model.dim != p.spec.dim)
    throw std::invalid_argument("evaluate_fisher: model/grid dim mismatch");
  const GridSpec& spec = p.spec;
  const int count = spec.node_count();
  const int n0 = spec.n[0], n1 = spec.dim == 2 ? spec.n[1] : 1;
  std::vector<double> ratio(static_cast<size_t>(count));
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      const int idx = spec.index(i, j);
      const double qi = q.values[static_cast<size_t>(idx)];
      const bool interior = i > 0 && i < n0 - 1 && (spec.dim == 1 || (j > 0 && j < n1 - 1));
      if (qi <= 0) {
        if (interior)
          throw std::invalid_argument("evaluate_fisher: reference density vanishes on interior node");
        ratio[static_cast<size_t>(idx)] = 0.0;
      } else {
        ratio[static_cast<size_t>(idx)] = p.values[static_cast<size_t>(idx)] / qi;
      }
    }
  const std::vector<double> grad = nodal_gradient(spec, ratio);
  std::vector<double> integrand(static_cast<size_t>(count), 0.0);
  for (int idx = 0; idx < count; ++idx) {
    const double r = ratio[static_cast<size_t>(idx)];
    if (!(r > ratio_floor)) continue;
    const Vec x = spec.node_flat(idx);
    const Mat a = model.diffusion_matrix(x);
    double quad = 0;
    for (int c = 0; c < spec.dim; ++c)
      for (int d = 0; d < spec.dim; ++d)
        quad += grad[static_cast<size_t>(idx * spec.dim + c)] * a(c, d) *
                grad[static_cast<size_t>(idx * spec.dim + d)];
    integrand[static_cast<size_t>(idx)] =
        0.5 * u.d2u(r) * quad * q.values[static_cast<size_t>(idx)];
  }
  return finish(strided_sum(spec, integrand), false, mass_defect_flag(p, q));
}

ScalarResult total_variation(const GridDensity& p, const GridDensity& q) {
  require_same_grid(p, q);
  const int count = p.spec.node_count();
  std::vector<double> integrand(static_cast<size_t>(count));
  for (int idx = 0; idx < count; ++idx)
    integrand[static_cast<size_t>(idx)] =
        std::abs(p.values[static_cast<size_t>(idx)] - q.values[static_cast<size_t>(idx)]);
  return finish(strided_sum(p.spec, integrand), false, mass_defect_flag(p, q));
}

ScalarResult tv_dissipation_rhs(const GridDensity& p, const GridDensity& q,
                                const DiffusionModel& model) {
  require_same_grid(p, q);
  if (model.dim != p.spec.dim)
    throw std::invalid_argument("tv_dissipation_rhs: model/grid dim mismatch");
  const GridSpec& spec = p.spec;
  const int n0 = spec.n[0], n1 = spec.dim == 2 ? spec.n[1] : 1;
  const int count = spec.node_count();
  std::vector<double> ratio(static_cast<size_t>(count));
  for (int idx = 0; idx < count; ++idx) {
    const double qi = q.values[static_cast<size_t>(idx)];
    ratio[static_cast<size_t>(idx)] =
        qi > 0 ? p.values[static_cast<size_t>(idx)] / qi : 1.0;
  }
  const std::vector<double> grad = nodal_gradient(spec, ratio);

  // Face flux in direction `axis` between flat indices l and r:
  //   sum_beta a_{axis,beta}(face) * d_beta ratio (face) * qbar(face),
  // where the along-axis derivative is the two-point difference and the
  // transverse one (2-D, off-diagonal a only) averages nodal gradients.
  const auto face_flux = [&](int i, int j, int axis) {
    const int il = spec.index(i, j);
    const int ir = axis == 0 ? spec.index(i + 1, j) : spec.index(i, j + 1);
    Vec xf = spec.node(i, j);
    xf[axis] += 0.5 * spec.dx(axis);
    const Mat a = model.diffusion_matrix(xf);
    const double qbar =
        0.5 * (q.values[static_cast<size_t>(il)] + q.values[static_cast<size_t>(ir)]);
    double flux = a(axis, axis) *
                  (ratio[static_cast<size_t>(ir)] - ratio[static_cast<size_t>(il)]) /
                  spec.dx(axis) * qbar;
    for (int beta = 0; beta < spec.dim; ++beta) {
      if (beta == axis) continue;
      const double gl = grad[static_cast<size_t>(il * spec.dim + beta)];
      const double gr = grad[static_cast<size_t>(ir * spec.dim + beta)];
      flux += a(axis, beta) * 0.5 * (gl + gr) * qbar;
    }
    return flux;
  };

  std::vector<double> integrand(static_cast<size_t>(count), 0.0);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      const int idx = spec.index(i, j);
      const double dev = ratio[static_cast<size_t>(idx)] - 1.0;
      const double sgn = dev > 0 ? 1.0 : (dev < 0 ? -1.0 : 0.0);
      if (sgn == 0.0) continue;
      double div = 0;
      // Zero-flux boundary: missing faces contribute nothing.
      if (i + 1 < n0) div += face_flux(i, j, 0) / spec.dx(0);
      if (i > 0) div -= face_flux(i - 1, j, 0) / spec.dx(0);
      if (spec.dim == 2) {
        if (j + 1 < n1) div += face_flux(i, j, 1) / spec.dx(1);
        if (j > 0) div -= face_flux(i, j - 1, 1) / spec.dx(1);
      }
      integrand[static_cast<size_t>(idx)] = 0.5 * sgn * div;
    }
  return finish(strided_sum(spec, integrand), false, mass_defect_flag(p, q));
}

}  // namespace nibec
