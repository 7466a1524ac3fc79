#include "nibec/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace nibec {

Mat DiffusionModel::diffusion_matrix(const Vec& x) const {
  const Mat s = sigma(x);
  return matmul(s, transpose(s));
}

DerivativeBundle diffusion_derivatives(const DiffusionModel& m, const Vec& x) {
  if (x.n != m.dim) throw std::invalid_argument("diffusion_derivatives: dim mismatch");
  DerivativeBundle d;
  d.x = x;
  d.b = m.drift(x);
  d.jac_b = m.drift_jacobian(x);
  d.sigma = m.sigma(x);
  d.dsigma = m.dsigma(x);
  d.d2sigma = m.d2sigma(x);
  d.log_p = m.log_pinf(x);
  d.grad_lp = m.grad_log_pinf(x);
  d.hess_lp = m.hess_log_pinf(x);

  const int n = m.dim, nd = m.noise_dim;
  d.a = Mat(n, n);
  d.da = Tensor3(n, n, n);
  d.d2a = Tensor4(n, n, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double aij = 0;
      for (int r = 0; r < nd; ++r) aij += d.sigma(i, r) * d.sigma(j, r);
      d.a(i, j) = aij;
      for (int k = 0; k < n; ++k) {
        double v = 0;
        for (int r = 0; r < nd; ++r)
          v += d.dsigma(k, i, r) * d.sigma(j, r) + d.sigma(i, r) * d.dsigma(k, j, r);
        d.da(k, i, j) = v;
      }
      for (int mm = 0; mm < n; ++mm)
        for (int k = 0; k < n; ++k) {
          double v = 0;
          for (int r = 0; r < nd; ++r)
            v += d.d2sigma(mm, k, i, r) * d.sigma(j, r) +
                 d.dsigma(mm, i, r) * d.dsigma(k, j, r) +
                 d.dsigma(k, i, r) * d.dsigma(mm, j, r) +
                 d.sigma(i, r) * d.d2sigma(mm, k, j, r);
          d.d2a(mm, k, i, j) = v;
        }
    }
  return d;
}

Vec reversed_drift(const DerivativeBundle& d) {
  const int n = d.b.n;
  Vec bb(n);
  for (int l = 0; l < n; ++l) {
    double v = -d.b[l];
    for (int j = 0; j < n; ++j)
      v += d.da(j, l, j) + d.a(l, j) * d.grad_lp[j];
    bb[l] = v;
  }
  return bb;
}

Vec reversed_drift(const DiffusionModel& m, const Vec& x) {
  return reversed_drift(diffusion_derivatives(m, x));
}

Mat reversed_drift_jacobian(const DiffusionModel& m, const Vec& x) {
  const DerivativeBundle d = diffusion_derivatives(m, x);
  const int n = m.dim;
  Mat j(n, n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) {
      double v = -d.jac_b(l, k);
      for (int jj = 0; jj < n; ++jj)
        v += d.d2a(k, jj, l, jj) + d.da(k, l, jj) * d.grad_lp[jj] +
             d.a(l, jj) * d.hess_lp(k, jj);
      j(l, k) = v;
    }
  return j;
}

DiffusionModel make_reversed_model(const DiffusionModel& m) {
  DiffusionModel r = m;
  r.name = m.name + "-reversed";
  // Copy by value so the reversed model stays valid independently of m.
  DiffusionModel fwd = m;
  r.drift = [fwd](const Vec& x) { return reversed_drift(fwd, x); };
  r.drift_jacobian = [fwd](const Vec& x) { return reversed_drift_jacobian(fwd, x); };
  return r;
}

StationarityResidual stationarity_residual(const DiffusionModel& m,
                                           const GridSpec& grid) {
  if (grid.dim != m.dim)
    throw std::invalid_argument("stationarity_residual: grid/model dim mismatch");
  // First pass: find max log pinf so the residual is scaled to max pinf = 1.
  double max_lp = -std::numeric_limits<double>::infinity();
  const int count = grid.node_count();
  for (int idx = 0; idx < count; ++idx)
    max_lp = std::max(max_lp, m.log_pinf(grid.node_flat(idx)));

  StationarityResidual res;
  res.argmax = Vec(m.dim);
  for (int idx = 0; idx < count; ++idx) {
    const Vec x = grid.node_flat(idx);
    const DerivativeBundle d = diffusion_derivatives(m, x);
    const int n = m.dim;
    double diff_term = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        diff_term += d.d2a(i, j, i, j) + d.da(i, i, j) * d.grad_lp[j] +
                     d.da(j, i, j) * d.grad_lp[i] +
                     d.a(i, j) * (d.hess_lp(i, j) + d.grad_lp[i] * d.grad_lp[j]);
    double drift_term = 0;
    for (int i = 0; i < n; ++i)
      drift_term += d.jac_b(i, i) + d.b[i] * d.grad_lp[i];
    const double r = (0.5 * diff_term - drift_term) * std::exp(d.log_p - max_lp);
    if (std::abs(r) > res.sup_norm) {
      res.sup_norm = std::abs(r);
      res.argmax = x;
    }
  }
  return res;
}

namespace {

template <typename F>
auto central_diff(const F& f, const Vec& x, int axis, double h) {
  Vec xp = x, xm = x;
  xp[axis] += h;
  xm[axis] -= h;
  return std::pair{f(xp), f(xm)};
}

void update(FieldAudit& a, double dev, const Vec& x) {
  if (dev > a.max_rel_dev) {
    a.max_rel_dev = dev;
    a.argmax = x;
  }
}

}  // namespace

std::vector<FieldAudit> finite_difference_audit(const DiffusionModel& m,
                                                const std::vector<Vec>& points,
                                                double h) {
  FieldAudit jb{"drift_jacobian", 0.0, Vec(m.dim)};
  FieldAudit ds{"dsigma", 0.0, Vec(m.dim)};
  FieldAudit d2s{"d2sigma", 0.0, Vec(m.dim)};
  FieldAudit glp{"grad_log_pinf", 0.0, Vec(m.dim)};
  FieldAudit hlp{"hess_log_pinf", 0.0, Vec(m.dim)};
  const auto rel = [](double fd, double an) {
    return std::abs(fd - an) / std::max(1.0, std::abs(an));
  };
  for (const Vec& x : points) {
    const Mat an_jb = m.drift_jacobian(x);
    const Tensor3 an_ds = m.dsigma(x);
    const Tensor4 an_d2s = m.d2sigma(x);
    const Vec an_g = m.grad_log_pinf(x);
    const Mat an_h = m.hess_log_pinf(x);
    for (int k = 0; k < m.dim; ++k) {
      const auto [bp, bm] = central_diff(m.drift, x, k, h);
      for (int l = 0; l < m.dim; ++l)
        update(jb, rel((bp[l] - bm[l]) / (2 * h), an_jb(l, k)), x);
      const auto [sp, sm] = central_diff(m.sigma, x, k, h);
      for (int l = 0; l < m.dim; ++l)
        for (int i = 0; i < m.noise_dim; ++i)
          update(ds, rel((sp(l, i) - sm(l, i)) / (2 * h), an_ds(k, l, i)), x);
      const auto [tp, tm] = central_diff(m.dsigma, x, k, h);
      for (int mm = 0; mm < m.dim; ++mm)
        for (int l = 0; l < m.dim; ++l)
          for (int i = 0; i < m.noise_dim; ++i)
            update(d2s, rel((tp(mm, l, i) - tm(mm, l, i)) / (2 * h),
                            an_d2s(k, mm, l, i)),
                   x);
      const auto [lp, lm] = central_diff(m.log_pinf, x, k, h);
      update(glp, rel((lp - lm) / (2 * h), an_g[k]), x);
      const auto [gp, gm] = central_diff(m.grad_log_pinf, x, k, h);
      for (int l = 0; l < m.dim; ++l)
        update(hlp, rel((gp[l] - gm[l]) / (2 * h), an_h(l, k)), x);
    }
  }
  return {jb, ds, d2s, glp, hlp};
}

}  // namespace nibec
