#include "nibec/bakry_emery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nibec/errors.hpp"
#include "nibec/parallel.hpp"

namespace nibec {

Mat assemble_theta(const DerivativeBundle& d) {
  const int n = d.b.n;        // state dimension
  const int dn = d.sigma.cols;  // noise dimension
  Mat theta(n, n);

  for (int l = 0; l < n; ++l)
    for (int lp = 0; lp < n; ++lp) {
      double t = 0.0;

      // -(1/2) b_m d_m a_{ll'}
      for (int m = 0; m < n; ++m) t -= 0.5 * d.b[m] * d.da(m, l, lp);

      // +(1/2)(a_{kl'} d_k b_l + a_{kl} d_k b_{l'})
      for (int k = 0; k < n; ++k)
        t += 0.5 * (d.a(k, lp) * d.jac_b(l, k) + d.a(k, l) * d.jac_b(lp, k));

      // -(1/4) a_{mk} d_mk a_{ll'}
      for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) t -= 0.25 * d.a(m, k) * d.d2a(m, k, l, lp);

      // -(1/2)(a_{kl'} d_kj a_{lj} + a_{kl} d_kj a_{l'j})
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          t -= 0.5 * (d.a(k, lp) * d.d2a(k, j, l, j) + d.a(k, l) * d.d2a(k, j, lp, j));

      // -a_{kl} a_{jl'} d_kj ln pinf
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) t -= d.a(k, l) * d.a(j, lp) * d.hess_lp(k, j);

      // -(1/2)(a_{kl} d_k a_{l'j} + a_{kl'} d_k a_{lj}) d_j ln pinf
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          t -= 0.5 * (d.a(k, l) * d.da(k, lp, j) + d.a(k, lp) * d.da(k, l, j)) *
               d.grad_lp[j];

      // -(1/4)(a_{mk} d_m sigma_{li} d_k sigma_{l'i}
      //        + sigma_{ki} d_k sigma_{lj} sigma_{mj} d_m sigma_{l'i})
      for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < dn; ++i)
            t -= 0.25 * d.a(m, k) * d.dsigma(m, l, i) * d.dsigma(k, lp, i);
      for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m)
          for (int i = 0; i < dn; ++i)
            for (int j = 0; j < dn; ++j)
              t -= 0.25 * d.sigma(k, i) * d.dsigma(k, l, j) * d.sigma(m, j) *
                   d.dsigma(m, lp, i);

      // +(1/2) sigma_{ki}(d_m sigma_{li} a_{ml'} + d_m sigma_{l'i} a_{ml})
      //        d_k ln pinf
      for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m)
          for (int i = 0; i < dn; ++i)
            t += 0.5 * d.sigma(k, i) *
                 (d.dsigma(m, l, i) * d.a(m, lp) + d.dsigma(m, lp, i) * d.a(m, l)) *
                 d.grad_lp[k];

      // +(1/2) d_k[sigma_{ki}(d_m sigma_{li} a_{ml'} + d_m sigma_{l'i} a_{ml})]
      for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m)
          for (int i = 0; i < dn; ++i) {
            t += 0.5 * d.dsigma(k, k, i) *
                 (d.dsigma(m, l, i) * d.a(m, lp) + d.dsigma(m, lp, i) * d.a(m, l));
            t += 0.5 * d.sigma(k, i) *
                 (d.d2sigma(k, m, l, i) * d.a(m, lp) +
                  d.dsigma(m, l, i) * d.da(k, m, lp) +
                  d.d2sigma(k, m, lp, i) * d.a(m, l) +
                  d.dsigma(m, lp, i) * d.da(k, m, l));
          }

      theta(l, lp) = t;
    }

  double asym = 0.0;
  for (int l = 0; l < n; ++l)
    for (int lp = l + 1; lp < n; ++lp)
      asym = std::max(asym, std::abs(theta(l, lp) - theta(lp, l)));
  if (asym > 1e-10 * std::max(1.0, frobenius_norm(theta)))
    throw NumericalError("assemble_theta: asymmetric result, derivative fields inconsistent");
  return symmetrize(theta);
}

Mat assemble_theta(const DiffusionModel& m, const Vec& x) {
  return assemble_theta(diffusion_derivatives(m, x));
}

Mat assemble_theta_sigma_form(const DiffusionModel& m, const Vec& x) {
  const DerivativeBundle d = diffusion_derivatives(m, x);
  const Vec bbar = reversed_drift(d);
  const Mat jac_bbar = reversed_drift_jacobian(m, x);
  const int n = d.b.n;
  const int dn = d.sigma.cols;
  Mat sig(n, n);

  for (int l = 0; l < n; ++l)
    for (int lp = 0; lp < n; ++lp) {
      double s = 0.0;

      // (1/4)(d_k sigma_{lj} a_{km} d_m sigma_{l'j}
      //       - sigma_{ki} d_k sigma_{lj} sigma_{mj} d_m sigma_{l'i})
      for (int k = 0; k < n; ++k)
        for (int mm = 0; mm < n; ++mm)
          for (int j = 0; j < dn; ++j)
            s += 0.25 * d.dsigma(k, l, j) * d.a(k, mm) * d.dsigma(mm, lp, j);
      for (int k = 0; k < n; ++k)
        for (int mm = 0; mm < n; ++mm)
          for (int i = 0; i < dn; ++i)
            for (int j = 0; j < dn; ++j)
              s -= 0.25 * d.sigma(k, i) * d.dsigma(k, l, j) * d.sigma(mm, j) *
                   d.dsigma(mm, lp, i);

      // (1/2)(bbar_m d_m a_{ll'} + sigma_{l'i} a_{mk} d_mk sigma_{li})
      for (int mm = 0; mm < n; ++mm) s += 0.5 * bbar[mm] * d.da(mm, l, lp);
      for (int mm = 0; mm < n; ++mm)
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < dn; ++i)
            s += 0.5 * d.sigma(lp, i) * d.a(mm, k) * d.d2sigma(mm, k, l, i);

      // -a_{ml'} d_m bbar_l
      for (int mm = 0; mm < n; ++mm) s -= d.a(mm, lp) * jac_bbar(l, mm);

      // -(1/pinf) d_k[G_k pinf] with
      //   G_k = (1/2) a_{mk} d_m a_{ll'} - sigma_{ki} a_{ml'} d_m sigma_{li}
      for (int k = 0; k < n; ++k) {
        double g = 0.0, dg = 0.0;
        for (int mm = 0; mm < n; ++mm) {
          g += 0.5 * d.a(mm, k) * d.da(mm, l, lp);
          dg += 0.5 * (d.da(k, mm, k) * d.da(mm, l, lp) +
                       d.a(mm, k) * d.d2a(k, mm, l, lp));
          for (int i = 0; i < dn; ++i) {
            g -= d.sigma(k, i) * d.a(mm, lp) * d.dsigma(mm, l, i);
            dg -= d.dsigma(k, k, i) * d.a(mm, lp) * d.dsigma(mm, l, i) +
                  d.sigma(k, i) * d.da(k, mm, lp) * d.dsigma(mm, l, i) +
                  d.sigma(k, i) * d.a(mm, lp) * d.d2sigma(k, mm, l, i);
          }
        }
        s -= dg + g * d.grad_lp[k];
      }

      sig(l, lp) = s;
    }
  return symmetrize(sig);
}

Mat gamma_matrix(const DerivativeBundle& d, const Vec& grad_rho,
                 const Mat& hess_rho) {
  const int n = d.sigma.rows;
  const int dn = d.sigma.cols;
  Vec w(dn);
  for (int i = 0; i < dn; ++i) {
    double wi = 0.0;
    for (int l = 0; l < n; ++l) wi += d.sigma(l, i) * grad_rho[l];
    w[i] = wi;
  }
  double g11 = 0.0, g12 = 0.0, wsq = 0.0;
  for (int i = 0; i < dn; ++i) {
    wsq += w[i] * w[i];
    for (int j = 0; j < dn; ++j) {
      double gij = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          gij += d.sigma(k, j) * d.sigma(l, i) * hess_rho(k, l);
          gij += 0.5 * (d.sigma(k, j) * d.dsigma(k, l, i) +
                        d.sigma(k, i) * d.dsigma(k, l, j)) * grad_rho[l];
        }
      g11 += gij * gij;
      g12 += w[i] * w[j] * gij;
    }
  }
  Mat gamma(2, 2);
  gamma(0, 0) = g11;
  gamma(0, 1) = gamma(1, 0) = g12;
  gamma(1, 1) = wsq * wsq;
  return gamma;
}

Mat lambda_delta_matrix(const EntropyGenerator& u, double r, double delta) {
  if (r < 0 || delta <= 0)
    throw std::invalid_argument("lambda_delta_matrix: need r >= 0 and delta > 0");
  if (!u.d2u || !u.d3u || !u.d4u)
    throw NumericalError("lambda_delta_matrix: generator '" + u.name +
                         "' lacks derivatives through fourth order");
  const double s = r + delta;
  Mat lam(2, 2);
  lam(0, 0) = u.d2u(s);
  lam(0, 1) = lam(1, 0) = u.d3u(s);
  lam(1, 1) = 0.5 * u.d4u(s);
  return lam;
}

GammaPair structure_pair(const DerivativeBundle& d, const Vec& grad_rho,
                         const Mat& hess_rho, const EntropyGenerator& u,
                         double r, double delta) {
  GammaPair gp;
  gp.gamma = gamma_matrix(d, grad_rho, hess_rho);
  gp.lambda_delta = lambda_delta_matrix(u, r, delta);
  gp.trace_product = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      gp.trace_product += gp.lambda_delta(i, j) * gp.gamma(j, i);
  return gp;
}

ThetaField nibec_lambda(const DiffusionModel& m, const GridSpec& grid) {
  ThetaField f;
  f.grid = grid;
  f.dim = m.dim;
  const int count = grid.node_count();
  f.theta.assign(static_cast<size_t>(count) * m.dim * m.dim, 0.0);
  f.lambda_min.assign(static_cast<size_t>(count), 0.0);

  parallel_chunks(static_cast<size_t>(count), 512, [&](std::size_t nb, std::size_t ne) {
    for (std::size_t idx = nb; idx < ne; ++idx) {
      const Vec x = grid.node_flat(static_cast<int>(idx));
      const DerivativeBundle d = diffusion_derivatives(m, x);
      if (sym_eigen(d.a).values[0] <= 1e-10)
        throw NumericalError("nibec_lambda: diffusion matrix singular on grid");
      const Mat theta = assemble_theta(d);
      for (int l = 0; l < m.dim; ++l)
        for (int lp = 0; lp < m.dim; ++lp)
          f.theta[idx * m.dim * m.dim + static_cast<size_t>(l * m.dim + lp)] =
              theta(l, lp);
      f.lambda_min[idx] = generalized_min_eigenvalue(theta, d.a);
    }
  });

  f.inf_lambda = std::numeric_limits<double>::infinity();
  for (int idx = 0; idx < count; ++idx)
    if (f.lambda_min[static_cast<size_t>(idx)] < f.inf_lambda) {
      f.inf_lambda = f.lambda_min[static_cast<size_t>(idx)];
      f.argmin = grid.node_flat(idx);
    }
  return f;
}

DiffusionModel rotation_gauge(const DiffusionModel& base, const GaugeFamily& g) {
  if (base.dim != 2 || base.noise_dim != 2)
    throw std::invalid_argument("rotation_gauge: base model must be 2-D with 2-D noise");
  const GridSpec& box = base.recommended_grid;
  std::vector<Vec> probes = {Vec{0.0, 0.0}};
  if (box.dim == 2) {
    probes.push_back(Vec{box.lo[0], box.lo[1]});
    probes.push_back(Vec{box.hi[0], box.hi[1]});
    probes.push_back(Vec{box.lo[0], box.hi[1]});
    probes.push_back(Vec{box.hi[0], box.lo[1]});
  }
  for (const Vec& x : probes) {
    const Mat s = base.sigma(x);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (std::abs(s(i, j) - (i == j ? 1.0 : 0.0)) > 1e-12)
          throw std::invalid_argument("rotation_gauge: base sigma must be the identity");
  }
  if (!g.phi || !g.grad_phi || !g.hess_phi)
    throw std::invalid_argument("rotation_gauge: gauge family lacks derivative fields");

  DiffusionModel m = base;
  m.name = base.name + "+rot";
  const ScalarField phi = g.phi;
  const VecField grad_phi = g.grad_phi;
  const MatField hess_phi = g.hess_phi;
  m.sigma = [phi](const Vec& x) {
    const double p = phi(x);
    const double c = std::cos(p), s = std::sin(p);
    Mat r(2, 2);
    r(0, 0) = c;
    r(0, 1) = s;
    r(1, 0) = -s;
    r(1, 1) = c;
    return r;
  };
  m.dsigma = [phi, grad_phi](const Vec& x) {
    const double p = phi(x);
    const double c = std::cos(p), s = std::sin(p);
    const Vec gp = grad_phi(x);
    // dR/dphi
    const double e[2][2] = {{-s, c}, {-c, -s}};
    Tensor3 t(2, 2, 2);
    for (int mm = 0; mm < 2; ++mm)
      for (int l = 0; l < 2; ++l)
        for (int i = 0; i < 2; ++i) t(mm, l, i) = gp[mm] * e[l][i];
    return t;
  };
  m.d2sigma = [phi, grad_phi, hess_phi](const Vec& x) {
    const double p = phi(x);
    const double c = std::cos(p), s = std::sin(p);
    const Vec gp = grad_phi(x);
    const Mat hp = hess_phi(x);
    const double e[2][2] = {{-s, c}, {-c, -s}};
    const double r[2][2] = {{c, s}, {-s, c}};  // d2R/dphi2 = -R
    Tensor4 t(2, 2, 2, 2);
    for (int mm = 0; mm < 2; ++mm)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          for (int i = 0; i < 2; ++i)
            t(mm, k, l, i) = hp(mm, k) * e[l][i] - gp[mm] * gp[k] * r[l][i];
    return t;
  };
  return m;
}

Mat theta_rotation_closed_form(const Vec& grad_v, const Mat& hess_v,
                               const Vec& grad_phi, const Mat& hess_phi) {
  const double g1 = grad_phi[0], g2 = grad_phi[1];
  const double v1 = grad_v[0], v2 = grad_v[1];
  Mat theta = hess_v;
  const double gsq = g1 * g1 + g2 * g2;
  theta(0, 0) += -0.25 * gsq - 0.25 * g2 * g2 + hess_phi(0, 1) - 2.0 * g1 * v2;
  theta(1, 1) += -0.25 * gsq - 0.25 * g1 * g1 - hess_phi(0, 1) + 2.0 * g2 * v1;
  const double off = 0.25 * g1 * g2 +
                     0.5 * (hess_phi(1, 1) - hess_phi(0, 0)) + g1 * v1 - g2 * v2;
  theta(0, 1) += off;
  theta(1, 0) += off;
  return theta;
}

Mat mixed_criterion_theta(const DiffusionModel& m, const Vec& x, double alpha,
                          const Vec& grad_alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("mixed_criterion_theta: alpha must lie in [0,1]");
  const DerivativeBundle d = diffusion_derivatives(m, x);
  Mat theta = assemble_theta(d);
  const int n = m.dim;
  const int dn = m.noise_dim;
  Mat out(n, n);
  for (int l = 0; l < n; ++l)
    for (int lp = 0; lp < n; ++lp) {
      double corr = 0.0;
      for (int k = 0; k < n; ++k) {
        double term = 0.0;
        for (int mm = 0; mm < n; ++mm)
          for (int i = 0; i < dn; ++i) {
            term += (d.sigma(lp, i) * d.a(mm, k) - d.sigma(k, i) * d.a(mm, lp)) *
                    d.dsigma(mm, l, i);
            term += (d.sigma(l, i) * d.a(mm, k) - d.sigma(k, i) * d.a(mm, l)) *
                    d.dsigma(mm, lp, i);
          }
        corr += grad_alpha[k] * term;
      }
      out(l, lp) = alpha * theta(l, lp) - 0.5 * corr;
    }
  return symmetrize(out);
}

GaugeOptimum maximize_rate_curve(const std::function<double(double)>& lambda_of_eps,
                                 double eps_lo, double eps_hi,
                                 int coarse_points, int refine_evals) {
  if (!(eps_lo < eps_hi) || coarse_points < 3)
    throw std::invalid_argument("maximize_rate_curve: bad sweep parameters");
  GaugeOptimum opt;
  opt.best_lambda = -std::numeric_limits<double>::infinity();
  const auto eval = [&](double eps) {
    const double lam = lambda_of_eps(eps);
    opt.curve.push_back({eps, lam});
    if (lam > opt.best_lambda) {
      opt.best_lambda = lam;
      opt.best_eps = eps;
    }
    return lam;
  };

  std::vector<double> lams(static_cast<size_t>(coarse_points));
  int best = 0;
  for (int i = 0; i < coarse_points; ++i) {
    const double eps = eps_lo + (eps_hi - eps_lo) * i / (coarse_points - 1);
    lams[static_cast<size_t>(i)] = eval(eps);
    if (lams[static_cast<size_t>(i)] > lams[static_cast<size_t>(best)]) best = i;
  }

  // Golden-section refinement of the bracket around the coarse maximum.
  const double step = (eps_hi - eps_lo) / (coarse_points - 1);
  double a = std::max(eps_lo, eps_lo + (best - 1) * step);
  double b = std::min(eps_hi, eps_lo + (best + 1) * step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  for (int it = 2; it < refine_evals; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = eval(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = eval(x1);
    }
  }

  std::sort(opt.curve.begin(), opt.curve.end(),
            [](const GaugeCurvePoint& p, const GaugeCurvePoint& q) {
              return p.eps < q.eps;
            });
  return opt;
}

GaugeOptimum optimize_gauge_rate(const DiffusionModel& base,
                                 const std::function<GaugeFamily(double)>& family,
                                 double eps_lo, double eps_hi,
                                 const GridSpec& grid, int coarse_points,
                                 int refine_evals) {
  return maximize_rate_curve(
      [&](double eps) {
        return nibec_lambda(rotation_gauge(base, family(eps)), grid).inf_lambda;
      },
      eps_lo, eps_hi, coarse_points, refine_evals);
}

}  // namespace nibec
