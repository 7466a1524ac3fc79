#include "nibec/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nibec/errors.hpp"

namespace nibec {

namespace {

Tensor3 zero3(int d, int dn) { return Tensor3(d, d, dn); }
Tensor4 zero4(int d, int dn) { return Tensor4(d, d, d, dn); }

// Stationarity plus derivative-consistency check run by every builder.
// Tests redo both at full resolution; this guards against wiring mistakes.
void validate_entry(const DiffusionModel& m, const std::vector<Vec>& audit_points) {
  GridSpec coarse = m.recommended_grid;
  for (int a = 0; a < coarse.dim; ++a) coarse.n[static_cast<size_t>(a)] = 17;
  const StationarityResidual res = stationarity_residual(m, coarse);
  if (res.sup_norm > 1e-6)
    throw NumericalError(m.name + ": stationary density inconsistent with the fields");
  for (const FieldAudit& audit : finite_difference_audit(m, audit_points, 1e-5))
    if (audit.max_rel_dev > 1e-3)
      throw NumericalError(m.name + ": analytic field '" + audit.field +
                           "' disagrees with finite differences");
}

std::vector<Vec> box_points(const GridSpec& box) {
  const auto at = [&](double f1, double f2) {
    Vec x(box.dim);
    x[0] = f1 * box.hi[0];
    if (box.dim == 2) x[1] = f2 * box.hi[1];
    return x;
  };
  return {at(0.31, -0.47), at(-0.83, 0.29), at(0.57, 0.91)};
}

DiffusionModel gradient_base(const std::string& name, const PotentialTriple& pot,
                             const GridSpec& box) {
  DiffusionModel m;
  m.name = name;
  m.dim = 2;
  m.noise_dim = 2;
  const VecField grad = pot.grad;
  const MatField hess = pot.hess;
  const ScalarField v = pot.v;
  m.drift = [grad](const Vec& x) { return -1.0 * grad(x); };
  m.drift_jacobian = [hess](const Vec& x) { return -1.0 * hess(x); };
  m.sigma = [](const Vec&) { return Mat::identity(2); };
  m.dsigma = [](const Vec&) { return zero3(2, 2); };
  m.d2sigma = [](const Vec&) { return zero4(2, 2); };
  m.log_pinf = [v](const Vec& x) { return -2.0 * v(x); };
  m.grad_log_pinf = [grad](const Vec& x) { return -2.0 * grad(x); };
  m.hess_log_pinf = [hess](const Vec& x) { return -2.0 * hess(x); };
  m.recommended_grid = box;
  return m;
}

}  // namespace

ScalarProfile plateau_cutoff() {
  // Quintic join g(1+u) = 1 + u - 16u^3 + 23u^4 - 9u^5 (value/slope/curvature
  // match both ends).
  ScalarProfile p;
  p.f = [](double s) {
    const double t = std::abs(s), sg = s < 0 ? -1.0 : 1.0;
    if (t <= 1.0) return s;
    if (t >= 2.0) return 0.0;
    const double u = t - 1.0;
    return sg * (1.0 + u - 16.0 * u * u * u + 23.0 * u * u * u * u -
                 9.0 * u * u * u * u * u);
  };
  p.d1 = [](double s) {
    const double t = std::abs(s);
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    const double u = t - 1.0;
    return 1.0 - 48.0 * u * u + 92.0 * u * u * u - 45.0 * u * u * u * u;
  };
  p.d2 = [](double s) {
    const double t = std::abs(s), sg = s < 0 ? -1.0 : 1.0;
    if (t <= 1.0 || t >= 2.0) return 0.0;
    const double u = t - 1.0;
    return sg * (-96.0 * u + 276.0 * u * u - 180.0 * u * u * u);
  };
  return p;
}

ScalarProfile descent_cutoff(double eps) {
  if (!(eps > 0.0 && eps < 1.0 / 3.0))
    throw std::invalid_argument("descent_cutoff: eps must lie in (0, 1/3)");
  const double slope_cap = 2.0 * eps / (1.0 - eps);
  const double m = 0.95 * slope_cap;
  const double L = 0.9;   // support radius
  const double d2w = 0.1; // closing-ramp width
  // Width of the slope transition chosen so the profile integrates to zero
  // over [0, L]:  eps + delta (1+m)/2 - m (L - eps - d2w/2) = 0.
  const double delta = 2.0 * (m * (L - eps - 0.5 * d2w) - eps) / (1.0 + m);
  if (!(delta > 0.0) || eps + delta >= L - d2w)
    throw NumericalError("descent_cutoff: transition width infeasible at this eps");

  const auto h = [](double u) { return 3.0 * u * u - 2.0 * u * u * u; };
  const auto hint = [](double u) { return u * u * u - 0.5 * u * u * u * u; };
  const auto value = [=](double t) {
    if (t <= eps) return t;
    if (t >= L) return 0.0;
    if (t < eps + delta) {
      const double u = (t - eps) / delta;
      return eps + delta * (u - (1.0 + m) * hint(u));
    }
    if (t < L - d2w) return 0.5 * m * d2w + m * (L - d2w - t);
    const double u = (t - (L - d2w)) / d2w;
    return m * d2w * (0.5 - u + hint(u));
  };
  const auto slope = [=](double t) {
    if (t <= eps) return 1.0;
    if (t >= L) return 0.0;
    if (t < eps + delta) return 1.0 - (1.0 + m) * h((t - eps) / delta);
    if (t < L - d2w) return -m;
    return -m * (1.0 - h((t - (L - d2w)) / d2w));
  };
  const auto curv = [=](double t) {
    if (t <= eps || t >= L) return 0.0;
    if (t < eps + delta) {
      const double u = (t - eps) / delta;
      return -(1.0 + m) * 6.0 * u * (1.0 - u) / delta;
    }
    if (t < L - d2w) return 0.0;
    const double u = (t - (L - d2w)) / d2w;
    return m * 6.0 * u * (1.0 - u) / d2w;
  };

  // The shape is a construction, not a definition: check the advertised
  // constraints on a fine sample and refuse to hand out a broken profile.
  for (int i = 0; i <= 4000; ++i) {
    const double t = static_cast<double>(i) / 4000.0;
    const double f = value(t), s = slope(t);
    if (std::abs(f) > 2.0 * eps + 1e-10 || s > 1.0 + 1e-12 ||
        s < -slope_cap - 1e-12)
      throw NumericalError("descent_cutoff: constructed profile violates its constraints");
  }
  for (double joint : {eps, eps + delta, L - d2w, L}) {
    const double dl = value(joint - 1e-12), dr = value(joint + 1e-12);
    if (std::abs(dl - dr) > 1e-9)
      throw NumericalError("descent_cutoff: discontinuity at a piece boundary");
  }

  ScalarProfile p;
  p.f = [value](double s) {
    return s < 0 ? -value(-s) : value(s);
  };
  p.d1 = [slope](double s) { return slope(std::abs(s)); };
  p.d2 = [curv](double s) {
    return s < 0 ? -curv(-s) : curv(s);
  };
  return p;
}

ScalarProfile convex_well() {
  ScalarProfile p;
  p.f = [](double s) {
    const double t = std::abs(s);
    if (t <= 0.25) return 0.0;
    if (t >= 0.5) return t * t - 0.75 * t + 23.0 / 160.0;
    const double u = 4.0 * t - 1.0;
    return u * u * u * u / 32.0 - u * u * u * u * u / 80.0;
  };
  p.d1 = [](double s) {
    const double t = std::abs(s), sg = s < 0 ? -1.0 : 1.0;
    if (t <= 0.25) return 0.0;
    if (t >= 0.5) return sg * (2.0 * t - 0.75);
    const double u = 4.0 * t - 1.0;
    return sg * 0.5 * (u * u * u - 0.5 * u * u * u * u);
  };
  p.d2 = [](double s) {
    const double t = std::abs(s);
    if (t <= 0.25) return 0.0;
    if (t >= 0.5) return 2.0;
    const double u = 4.0 * t - 1.0;
    return 2.0 * (3.0 * u * u - 2.0 * u * u * u);
  };
  return p;
}

PotentialTriple example1_potential(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("example1_potential: alpha must lie in (0,1)");
  const double e = 2.0 + alpha;
  const double c2 = (2.0 + alpha) * (1.0 + alpha);
  const auto w = [e](double s) { return std::pow(std::abs(s), e); };
  const auto w1 = [e](double s) {
    return e * std::pow(std::abs(s), e - 2.0) * s;  // continuous through 0
  };
  const auto w2 = [c2, alpha](double s) { return c2 * std::pow(std::abs(s), alpha); };

  PotentialTriple pot;
  pot.v = [w](const Vec& x) { return x[0] * x[0] + w(x[0] - x[1]) + w(x[1]); };
  pot.grad = [w1](const Vec& x) {
    const double d = w1(x[0] - x[1]);
    return Vec{2.0 * x[0] + d, -d + w1(x[1])};
  };
  pot.hess = [w2](const Vec& x) {
    const double k1 = w2(x[0] - x[1]);
    const double k2 = w2(x[1]);
    Mat h(2, 2);
    h(0, 0) = 2.0 + k1;
    h(0, 1) = h(1, 0) = -k1;
    h(1, 1) = k1 + k2;
    return h;
  };
  return pot;
}

PotentialTriple example2_potential(double eps) {
  ScalarFn vf, v1, v2;
  if (eps == 0.0) {
    // Degenerate limit of the scaled well: a plain quadratic.
    vf = [](double s) { return s * s; };
    v1 = [](double s) { return 2.0 * s; };
    v2 = [](double) { return 2.0; };
  } else {
    if (!(eps > 0.0 && eps < 1.0 / 3.0))
      throw std::invalid_argument("example2_potential: eps must lie in [0, 1/3)");
    const ScalarProfile well = convex_well();
    const auto wf = well.f, w1 = well.d1, w2 = well.d2;
    vf = [eps, wf](double s) { return eps * eps * wf(s / eps); };
    v1 = [eps, w1](double s) { return eps * w1(s / eps); };
    v2 = [eps, w2](double s) { return w2(s / eps); };
  }
  PotentialTriple pot;
  pot.v = [vf](const Vec& x) {
    return x[0] * x[0] + vf(x[1]) + vf(x[0] - x[1]);
  };
  pot.grad = [v1](const Vec& x) {
    const double d = v1(x[0] - x[1]);
    return Vec{2.0 * x[0] + d, v1(x[1]) - d};
  };
  pot.hess = [v2](const Vec& x) {
    const double r1 = v2(x[0] - x[1]);
    const double r2 = v2(x[1]);
    Mat h(2, 2);
    h(0, 0) = 2.0 + r1;
    h(0, 1) = h(1, 0) = -r1;
    h(1, 1) = r1 + r2;
    return h;
  };
  return pot;
}

namespace {

// phi(x) = scale * c(x1) c(x2) for a scalar cutoff c with two derivatives.
GaugeFamily product_gauge(const std::string& kind, double eps, double scale,
                          const ScalarFn& c, const ScalarFn& c1, const ScalarFn& c2) {
  GaugeFamily g;
  g.kind = kind;
  g.eps = eps;
  g.phi = [scale, c](const Vec& x) { return scale * c(x[0]) * c(x[1]); };
  g.grad_phi = [scale, c, c1](const Vec& x) {
    return Vec{scale * c1(x[0]) * c(x[1]), scale * c(x[0]) * c1(x[1])};
  };
  g.hess_phi = [scale, c, c1, c2](const Vec& x) {
    Mat h(2, 2);
    h(0, 0) = scale * c2(x[0]) * c(x[1]);
    h(0, 1) = h(1, 0) = scale * c1(x[0]) * c1(x[1]);
    h(1, 1) = scale * c(x[0]) * c2(x[1]);
    return h;
  };
  return g;
}

}  // namespace

GaugeFamily example1_gauge(double eps) {
  if (!(eps >= 0.0 && eps < 1.0 / 3.0))
    throw std::invalid_argument("example1_gauge: eps must lie in [0, 1/3)");
  const ScalarProfile cut = plateau_cutoff();
  const auto base_f = cut.f, base_d1 = cut.d1, base_d2 = cut.d2;
  // c_eps(s) = eps * cut(s / eps): equals s on |s| <= eps, 0 beyond 2 eps.
  ScalarFn c, c1, c2;
  if (eps == 0.0) {
    c = [](double) { return 0.0; };
    c1 = [](double) { return 0.0; };
    c2 = [](double) { return 0.0; };
  } else {
    c = [eps, base_f](double s) { return eps * base_f(s / eps); };
    c1 = [eps, base_d1](double s) { return base_d1(s / eps); };
    c2 = [eps, base_d2](double s) { return base_d2(s / eps) / eps; };
  }
  return product_gauge("rotation2d", eps, -eps, c, c1, c2);
}

GaugeFamily example2_gauge(double eps) {
  const ScalarProfile cut = descent_cutoff(eps);
  return product_gauge("rotation2d", eps, -1.0, cut.f, cut.d1, cut.d2);
}

DiffusionModel build_ou(int dim, double k, double s) {
  if (dim < 1 || dim > 2) throw std::invalid_argument("build_ou: dim must be 1 or 2");
  if (!(k > 0.0 && s > 0.0)) throw std::invalid_argument("build_ou: k, s must be positive");
  DiffusionModel m;
  m.name = dim == 1 ? "ou1d" : "ou2d";
  m.dim = dim;
  m.noise_dim = dim;
  const double c = k / (s * s);
  m.drift = [k](const Vec& x) { return -k * x; };
  m.drift_jacobian = [k, dim](const Vec&) { return -k * Mat::identity(dim); };
  m.sigma = [s, dim](const Vec&) { return s * Mat::identity(dim); };
  m.dsigma = [dim](const Vec&) { return zero3(dim, dim); };
  m.d2sigma = [dim](const Vec&) { return zero4(dim, dim); };
  m.log_pinf = [c](const Vec& x) { return -c * dot(x, x); };
  m.grad_log_pinf = [c](const Vec& x) { return -2.0 * c * x; };
  m.hess_log_pinf = [c, dim](const Vec&) { return -2.0 * c * Mat::identity(dim); };
  const double sd = s / std::sqrt(2.0 * k);
  m.sample_pinf = [sd, dim](RandomStream& rng) {
    Vec x(dim);
    for (int i = 0; i < dim; ++i) x[i] = sd * rng.normal();
    return x;
  };
  const double half = 5.65685424949238 * sd;
  m.recommended_grid = dim == 1 ? GridSpec(-half, half, 513)
                                : GridSpec(-half, half, 129, -half, half, 129);
  validate_entry(m, box_points(m.recommended_grid));
  return m;
}

DiffusionModel build_nonreversible_ou(double nu, const Mat& q, const Mat& j) {
  const int d = q.rows;
  if (!(nu > 0.0)) throw std::invalid_argument("build_nonreversible_ou: nu must be positive");
  if (q.cols != d || j.rows != d || j.cols != d)
    throw std::invalid_argument("build_nonreversible_ou: Q, J must be square and matching");
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (std::abs(q(a, b) - q(b, a)) > 1e-12)
        throw std::invalid_argument("build_nonreversible_ou: Q must be symmetric");
  if (sym_eigen(q).values[0] <= 0.0)
    throw std::invalid_argument("build_nonreversible_ou: Q must be positive definite");
  double tr = 0.0;
  for (int a = 0; a < d; ++a) tr += j(a, a);
  const Mat qj = matmul(q, j);
  double skew = std::abs(tr);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) skew = std::max(skew, std::abs(qj(a, b) + qj(b, a)));
  if (skew > 1e-8)
    throw std::invalid_argument(
        "build_nonreversible_ou: rotational part does not preserve the stationary law");

  DiffusionModel m;
  m.name = "nonrev-ou";
  m.dim = d;
  m.noise_dim = d;
  Mat qpj = q;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) qpj(a, b) += j(a, b);
  m.drift = [qpj](const Vec& x) { return -1.0 * matvec(qpj, x); };
  m.drift_jacobian = [qpj](const Vec&) { return -1.0 * qpj; };
  const double sroot = std::sqrt(2.0 * nu);
  m.sigma = [sroot, d](const Vec&) { return sroot * Mat::identity(d); };
  m.dsigma = [d](const Vec&) { return zero3(d, d); };
  m.d2sigma = [d](const Vec&) { return zero4(d, d); };
  const Mat qc = q;
  m.log_pinf = [qc, nu](const Vec& x) { return -dot(x, matvec(qc, x)) / (2.0 * nu); };
  m.grad_log_pinf = [qc, nu](const Vec& x) { return (-1.0 / nu) * matvec(qc, x); };
  m.hess_log_pinf = [qc, nu](const Vec&) { return (-1.0 / nu) * qc; };

  // Covariance nu Q^{-1}: sample via the inverse symmetric square root of Q.
  const SymEigen eq = sym_eigen(q);
  Mat qinv_sqrt(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double sum = 0.0;
      for (int r = 0; r < d; ++r)
        sum += eq.vectors(a, r) * eq.vectors(b, r) / std::sqrt(eq.values[r]);
      qinv_sqrt(a, b) = sum;
    }
  const double rootnu = std::sqrt(nu);
  m.sample_pinf = [qinv_sqrt, rootnu, d](RandomStream& rng) {
    Vec z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    return rootnu * matvec(qinv_sqrt, z);
  };
  const double half = 5.65685424949238 * std::sqrt(nu / eq.values[0]);
  m.recommended_grid = d == 1 ? GridSpec(-half, half, 513)
                              : GridSpec(-half, half, 129, -half, half, 129);
  validate_entry(m, box_points(m.recommended_grid));
  return m;
}

DiffusionModel build_example1(double alpha, double eps) {
  if (!(eps >= 0.0 && eps < 1.0 / 3.0))
    throw std::invalid_argument("build_example1: eps must lie in [0, 1/3)");
  const GridSpec box(-3.0, 3.0, 201, -3.0, 3.0, 201);
  DiffusionModel m = gradient_base("example1", example1_potential(alpha), box);
  std::vector<Vec> pts = box_points(box);
  if (eps > 0.0) {
    m = rotation_gauge(m, example1_gauge(eps));
    m.name = "example1";
    // Probe the gauge interior as well (the cutoff vanishes beyond 2 eps).
    pts.push_back(Vec{0.6 * eps, -0.5 * eps});
    pts.push_back(Vec{1.5 * eps, 0.7 * eps});
  }
  validate_entry(m, pts);
  return m;
}

DiffusionModel build_example2(double eps) {
  if (!(eps >= 0.0 && eps < 1.0 / 3.0))
    throw std::invalid_argument("build_example2: eps must lie in [0, 1/3)");
  const GridSpec box(-1.2, 1.2, 241, -1.2, 1.2, 241);
  DiffusionModel m = gradient_base("example2", example2_potential(eps), box);
  std::vector<Vec> pts = box_points(box);
  if (eps > 0.0) {
    m = rotation_gauge(m, example2_gauge(eps));
    m.name = "example2";
    pts.push_back(Vec{0.5 * eps, 0.3 * eps});
    pts.push_back(Vec{0.5 * (eps + 0.8), -0.25});  // plateau region
  }
  validate_entry(m, pts);
  return m;
}

HessianEigenInfo hessian_min_eigen(double alpha, const Vec& x) {
  const double c2 = (2.0 + alpha) * (1.0 + alpha);
  const double k1 = c2 * std::pow(std::abs(x[0] - x[1]), alpha);
  const double k2 = c2 * std::pow(std::abs(x[1]), alpha);
  HessianEigenInfo info;
  info.gamma_minus = 1.0 + k1 + 0.5 * k2 -
                     std::sqrt(1.0 + k1 * k1 - k2 + 0.25 * k2 * k2);
  info.lower_bound = std::min(k2, 2.0);
  return info;
}

double example1_tail_infimum(double alpha, double half_width) {
  if (!(half_width > 0.0))
    throw std::invalid_argument("example1_tail_infimum: half width must be positive");
  // gamma- is nondecreasing in both curvatures kappa1, kappa2, and outside
  // the box either |x2| >= W (so kappa2 is large) or |x1| >= W with
  // |x1 - x2| >= W - |x2|.  The worst case is therefore attained on the
  // 1-parameter family kappa1 = k(W - t), kappa2 = k(t), t in [0, W].
  const double c2 = (2.0 + alpha) * (1.0 + alpha);
  double worst = std::numeric_limits<double>::infinity();
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    const double t = half_width * i / n;
    const double k1 = c2 * std::pow(half_width - t, alpha);
    const double k2 = c2 * std::pow(t, alpha);
    const double g = 1.0 + k1 + 0.5 * k2 -
                     std::sqrt(1.0 + k1 * k1 - k2 + 0.25 * k2 * k2);
    worst = std::min(worst, g);
  }
  return worst;
}

double example2_tail_infimum() {
  // Outside any box containing the gauge support, at least one of the two
  // curvature profiles equals its saturated value 2; scan the free one.
  double worst = std::numeric_limits<double>::infinity();
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double u = 2.0 * i / n;
    Mat a(2, 2);
    a(0, 0) = 4.0;
    a(0, 1) = a(1, 0) = -2.0;
    a(1, 1) = 2.0 + u;
    worst = std::min(worst, sym_eigen(a).values[0]);
    Mat b(2, 2);
    b(0, 0) = 2.0 + u;
    b(0, 1) = b(1, 0) = -u;
    b(1, 1) = u + 2.0;
    worst = std::min(worst, sym_eigen(b).values[0]);
  }
  return worst;
}

std::vector<GrowthProbeRow> probe_growth_conditions(const PotentialTriple& v,
                                                    const std::vector<double>& radii,
                                                    int n_angles) {
  if (n_angles < 4) throw std::invalid_argument("probe_growth_conditions: too few angles");
  for (size_t i = 1; i < radii.size(); ++i)
    if (radii[i] <= radii[i - 1])
      throw std::invalid_argument("probe_growth_conditions: radii must increase");
  std::vector<GrowthProbeRow> rows;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (double r : radii) {
    GrowthProbeRow row;
    row.radius = r;
    row.laplace_over_grad_sq = neg_inf;
    row.inward_over_r_sq = neg_inf;
    row.hess_norm_over_v = neg_inf;
    for (int a = 0; a < n_angles; ++a) {
      const double th = 2.0 * M_PI * a / n_angles;
      const Vec x{r * std::cos(th), r * std::sin(th)};
      const Vec g = v.grad(x);
      const Mat h = v.hess(x);
      const double val = v.v(x);
      const double gsq = dot(g, g);
      const double lap = h(0, 0) + h(1, 1);
      row.laplace_over_grad_sq = std::max(
          row.laplace_over_grad_sq,
          gsq > 1e-300 ? lap / gsq : std::numeric_limits<double>::infinity());
      row.inward_over_r_sq = std::max(row.inward_over_r_sq, -dot(x, g) / (r * r));
      row.hess_norm_over_v = std::max(
          row.hess_norm_over_v,
          val > 1e-300 ? frobenius_norm(h) / val
                       : std::numeric_limits<double>::infinity());
    }
    rows.push_back(row);
  }
  return rows;
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> v;
    {
      CatalogEntry e;
      e.name = "ou1d";
      e.summary = "1-D Ornstein-Uhlenbeck: b = -k x, sigma = s; certified rate k";
      e.parameter_doc = "k=1 (stiffness, >0), s=1 (noise scale, >0)";
      e.defaults = {{"k", 1.0}, {"s", 1.0}};
      e.build = [](const std::map<std::string, double>& p) {
        return build_ou(1, p.at("k"), p.at("s"));
      };
      v.push_back(e);
    }
    {
      CatalogEntry e;
      e.name = "ou2d";
      e.summary = "2-D isotropic Ornstein-Uhlenbeck";
      e.parameter_doc = "k=1 (stiffness, >0), s=1 (noise scale, >0)";
      e.defaults = {{"k", 1.0}, {"s", 1.0}};
      e.build = [](const std::map<std::string, double>& p) {
        return build_ou(2, p.at("k"), p.at("s"));
      };
      v.push_back(e);
    }
    {
      CatalogEntry e;
      e.name = "nonrev-ou";
      e.summary =
          "2-D Gaussian with divergence-free rotational drift; curvature "
          "matrix nu(2Q - J - J*) in closed form";
      e.parameter_doc =
          "nu=0.5 (temperature, >0), q1=1, q2=4 (potential curvature diag, >0), "
          "circ=1 (rotation strength)";
      e.defaults = {{"nu", 0.5}, {"q1", 1.0}, {"q2", 4.0}, {"circ", 1.0}};
      e.build = [](const std::map<std::string, double>& p) {
        Mat q(2, 2);
        q(0, 0) = p.at("q1");
        q(1, 1) = p.at("q2");
        Mat j(2, 2);
        j(0, 1) = -p.at("circ") * p.at("q2");
        j(1, 0) = p.at("circ") * p.at("q1");
        return build_nonreversible_ou(p.at("nu"), q, j);
      };
      v.push_back(e);
    }
    {
      CatalogEntry e;
      e.name = "example1";
      e.summary =
          "Anisotropic potential x1^2 + |x1-x2|^(2+alpha) + |x2|^(2+alpha); "
          "Hessian singular at the origin, rotation gauge restores a rate";
      e.parameter_doc = "alpha=0.5 (in (0,1)), eps=0.05 (gauge size, in [0,1/3))";
      e.defaults = {{"alpha", 0.5}, {"eps", 0.05}};
      e.build = [](const std::map<std::string, double>& p) {
        return build_example1(p.at("alpha"), p.at("eps"));
      };
      v.push_back(e);
    }
    {
      CatalogEntry e;
      e.name = "example2";
      e.summary =
          "Potential with flat-core wells: Hessian singular on a region; "
          "rotation gauge certifies a near-optimal rate";
      e.parameter_doc = "eps=0.05 (well/gauge scale, in (0,1/3))";
      e.defaults = {{"eps", 0.05}};
      e.build = [](const std::map<std::string, double>& p) {
        return build_example2(p.at("eps"));
      };
      v.push_back(e);
    }
    return v;
  }();
  return entries;
}

DiffusionModel build_catalog_model(const std::string& name,
                                   const std::map<std::string, double>& params) {
  for (const CatalogEntry& e : catalog()) {
    if (e.name != name) continue;
    std::map<std::string, double> merged = e.defaults;
    for (const auto& [key, value] : params) {
      if (merged.find(key) == merged.end())
        throw ConfigError("model '" + name + "' has no parameter '" + key + "'");
      merged[key] = value;
    }
    return e.build(merged);
  }
  throw ConfigError("unknown catalog model '" + name + "'");
}

}  // namespace nibec
