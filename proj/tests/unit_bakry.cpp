// Curvature-matrix assembly and the certified-rate machinery.  Oracles:
// closed forms for the linear models, an independent reversed-drift assembly
// route, and the rotation closed form for gauged gradient models.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nibec/bakry_emery.hpp"
#include "nibec/catalog.hpp"
#include "nibec/errors.hpp"
#include "nibec/rng.hpp"

using namespace nibec;

namespace {

std::vector<Vec> box_sample(int dim, double half, int count, std::uint64_t seed) {
  RandomStream rs(seed, 0u);
  std::vector<Vec> pts;
  for (int k = 0; k < count; ++k) {
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = rs.uniform_in(-half, half);
    pts.push_back(x);
  }
  return pts;
}

}  // namespace

TEST_CASE("isotropic OU has the constant curvature matrix k s^2 I") {
  const DiffusionModel ou2 = build_ou(2, 1.7, 0.8);
  for (const Vec& x : box_sample(2, 2.0, 100, 21u)) {
    const Mat theta = assemble_theta(ou2, x);
    const Mat want = (1.7 * 0.8 * 0.8) * Mat::identity(2);
    CHECK(frobenius_norm(theta - want) < 1e-12);
  }
  // With a = s^2 I the pencil eigenvalue is exactly k everywhere.
  const ThetaField f = nibec_lambda(ou2, GridSpec(-2, 2, 21, -2, 2, 21));
  CHECK(f.inf_lambda == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("nonreversible OU matches its closed-form curvature matrix") {
  const double nu = 0.5;
  Mat q(2, 2), j(2, 2);
  q(0, 0) = 1.0;
  q(1, 1) = 4.0;
  j(0, 1) = -4.0;
  j(1, 0) = 1.0;
  const DiffusionModel m = build_nonreversible_ou(nu, q, j);
  const Mat want = nu * (2.0 * q - (j + transpose(j)));
  for (const Vec& x : box_sample(2, 3.0, 100, 22u)) {
    const Mat theta = assemble_theta(m, x);
    CHECK(frobenius_norm(theta - want) < 1e-10);
  }
  // Pencil against a = 2 nu I: lambda = eig_min(want) / (2 nu), closed form
  // (5 - sqrt(18)) / 2 for these parameters.
  const ThetaField f = nibec_lambda(m, GridSpec(-3, 3, 31, -3, 3, 31));
  CHECK(f.inf_lambda ==
        doctest::Approx((5.0 - std::sqrt(18.0)) / 2.0).epsilon(1e-12));
}

TEST_CASE("direct and reversed-drift assemblies of Theta agree") {
  for (const CatalogEntry& e : catalog()) {
    CAPTURE(e.name);
    const DiffusionModel m = e.build(e.defaults);
    const double half = 0.55 * m.recommended_grid.hi[0];
    for (const Vec& x : box_sample(m.dim, half, 120, 23u)) {
      const Mat t1 = assemble_theta(m, x);
      const Mat t2 = assemble_theta_sigma_form(m, x);
      const double scale = 1.0 + frobenius_norm(t1);
      CHECK(frobenius_norm(t1 - t2) / scale < 1e-8);
    }
  }
}

TEST_CASE("rotation closed form equals the general assembler") {
  const double alpha = 0.5, eps = 0.05;
  const PotentialTriple v = example1_potential(alpha);
  const GaugeFamily g = example1_gauge(eps);
  const DiffusionModel base = build_example1(alpha, 0.0);
  const DiffusionModel gauged = rotation_gauge(base, g);
  for (const Vec& x : box_sample(2, 1.0, 200, 24u)) {
    const Mat got = assemble_theta(gauged, x);
    const Mat want = theta_rotation_closed_form(v.grad(x), v.hess(x),
                                                g.grad_phi(x), g.hess_phi(x));
    const double scale = 1.0 + frobenius_norm(want);
    CHECK(frobenius_norm(got - want) / scale < 1e-8);
  }
}

TEST_CASE("ungauged gradient models have Theta = hess V") {
  // For b = -grad V, sigma = I, pinf ~ e^{-2V} the matrix reduces to hess V;
  // direct evaluation against the analytic hessian of example 1.
  const double alpha = 0.5;
  const PotentialTriple v = example1_potential(alpha);
  const DiffusionModel base = build_example1(alpha, 0.0);
  for (const Vec& x : box_sample(2, 1.5, 100, 25u)) {
    const Mat theta = assemble_theta(base, x);
    CHECK(frobenius_norm(theta - v.hess(x)) < 1e-9);
  }
}

TEST_CASE("gamma matrix is PSD for random observables") {
  const DiffusionModel m = build_catalog_model("example1", {});
  RandomStream rs(26u, 0u);
  for (int k = 0; k < 1000; ++k) {
    const Vec x = {rs.uniform_in(-1, 1), rs.uniform_in(-1, 1)};
    const DerivativeBundle d = diffusion_derivatives(m, x);
    Vec grad(2);
    Mat hess(2, 2);
    grad[0] = rs.normal();
    grad[1] = rs.normal();
    hess(0, 0) = rs.normal();
    hess(1, 1) = rs.normal();
    hess(0, 1) = hess(1, 0) = rs.normal();
    const Mat gamma = gamma_matrix(d, grad, hess);
    CHECK(sym_min_eigenvalue(gamma) >= -1e-10 * (1.0 + frobenius_norm(gamma)));
  }
}

TEST_CASE("entropy weight matrix: PSD iff admissible, kl degenerate") {
  const EntropyGenerator kl = builtin_entropy("kl");
  const EntropyGenerator chi2 = builtin_entropy("chi2");
  const EntropyGenerator quartic = builtin_entropy("quartic");
  RandomStream rs(27u, 0u);
  bool quartic_indefinite = false;
  for (int k = 0; k < 1000; ++k) {
    const double r = rs.uniform_in(0.0, 5.0);
    const double delta = rs.uniform_in(1e-3, 0.5);
    const Mat lk = lambda_delta_matrix(kl, r, delta);
    const Mat lc = lambda_delta_matrix(chi2, r, delta);
    CHECK(sym_min_eigenvalue(lk) >= -1e-12 * (1.0 + frobenius_norm(lk)));
    CHECK(sym_min_eigenvalue(lc) >= -1e-12);
    // kl sits on the boundary: det = U'' U''''/2 - (U''')^2 = 0 identically.
    const double det = lk(0, 0) * lk(1, 1) - lk(0, 1) * lk(1, 0);
    CHECK(std::abs(det) < 1e-12 * (1.0 + lk(0, 0) * lk(0, 0)));
    const Mat lq = lambda_delta_matrix(quartic, r, delta);
    if (sym_min_eigenvalue(lq) < -1e-8) quartic_indefinite = true;
  }
  CHECK(quartic_indefinite);
  // Spot value: kl at r + delta = 1.5 is [[1/1.5, -1/2.25], [-1/2.25, 1/3.375]].
  const Mat l = lambda_delta_matrix(kl, 1.0, 0.5);
  CHECK(l(0, 0) == doctest::Approx(1.0 / 1.5).epsilon(1e-14));
  CHECK(l(0, 1) == doctest::Approx(-1.0 / 2.25).epsilon(1e-14));
  CHECK(l(1, 1) == doctest::Approx(1.0 / 3.375).epsilon(1e-14));
  CHECK_THROWS_AS((void)lambda_delta_matrix(kl, -0.1, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)lambda_delta_matrix(builtin_entropy("tv"), 1.0, 0.5),
                  NumericalError);
}

TEST_CASE("trace pairing of the structure matrices is nonnegative") {
  // tr(Lambda_delta Gamma) >= 0 for PSD factors; this is the pointwise
  // integrand of the dissipation estimate.
  const DiffusionModel m = build_catalog_model("example2", {});
  RandomStream rs(28u, 0u);
  for (int k = 0; k < 1000; ++k) {
    const Vec x = {rs.uniform_in(-1, 1), rs.uniform_in(-1, 1)};
    const DerivativeBundle d = diffusion_derivatives(m, x);
    Vec grad(2);
    Mat hess(2, 2);
    grad[0] = rs.normal();
    grad[1] = rs.normal();
    hess(0, 0) = rs.normal();
    hess(1, 1) = rs.normal();
    hess(0, 1) = hess(1, 0) = rs.normal();
    const double r = rs.uniform_in(0.0, 4.0);
    const double delta = rs.uniform_in(1e-3, 0.3);
    const GammaPair gp =
        structure_pair(d, grad, hess, builtin_entropy("kl"), r, delta);
    const double scale =
        1.0 + frobenius_norm(gp.gamma) * frobenius_norm(gp.lambda_delta);
    CHECK(gp.trace_product >= -1e-10 * scale);
  }
}

TEST_CASE("position-weighted criterion reduces to alpha Theta for constant sigma") {
  const DiffusionModel m = build_catalog_model("nonrev-ou", {});
  RandomStream rs(29u, 0u);
  for (int k = 0; k < 100; ++k) {
    const Vec x = {rs.uniform_in(-2, 2), rs.uniform_in(-2, 2)};
    const double alpha = rs.uniform_in(0.0, 1.0);
    const Vec ga = {rs.normal(), rs.normal()};  // irrelevant when dsigma = 0
    const Mat mixed = mixed_criterion_theta(m, x, alpha, ga);
    const Mat want = alpha * assemble_theta(m, x);
    CHECK(frobenius_norm(mixed - want) < 1e-10 * (1.0 + frobenius_norm(want)));
  }
  CHECK_THROWS_AS(
      (void)mixed_criterion_theta(m, Vec{0.0, 0.0}, 1.5, Vec{0.0, 0.0}),
      std::invalid_argument);
}

TEST_CASE("position-weighted criterion at alpha = 1, flat weight, is Theta") {
  // Holds even for position-dependent sigma (the gauged first example).
  const DiffusionModel m = build_catalog_model("example1", {});
  for (const Vec& x : box_sample(2, 0.3, 50, 30u)) {
    const Mat mixed = mixed_criterion_theta(m, x, 1.0, Vec{0.0, 0.0});
    const Mat want = assemble_theta(m, x);
    CHECK(frobenius_norm(mixed - want) < 1e-10 * (1.0 + frobenius_norm(want)));
  }
  // ... and the weight gradient genuinely matters once sigma varies.
  bool gradient_matters = false;
  for (const Vec& x : box_sample(2, 0.08, 50, 31u)) {
    const Mat a = mixed_criterion_theta(m, x, 0.5, Vec{1.0, -1.0});
    const Mat b = 0.5 * assemble_theta(m, x);
    if (frobenius_norm(a - b) > 1e-6) gradient_matters = true;
  }
  CHECK(gradient_matters);
}

TEST_CASE("lambda field certifies Theta >= lambda a node by node") {
  const DiffusionModel m = build_catalog_model("example1", {});
  const GridSpec grid(-1.5, 1.5, 41, -1.5, 1.5, 41);
  const ThetaField f = nibec_lambda(m, grid);
  REQUIRE(f.lambda_min.size() == static_cast<size_t>(grid.node_count()));
  RandomStream rs(32u, 0u);
  double observed_inf = 1e300;
  for (int i = 0; i < grid.node_count(); ++i) {
    observed_inf = std::min(observed_inf, f.lambda_min[static_cast<size_t>(i)]);
    if (i % 7 != 0) continue;
    const Vec x = grid.node_flat(i);
    const Mat a = m.diffusion_matrix(x);
    Mat theta(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        theta(r, c) = f.theta[static_cast<size_t>(i) * 4 +
                              static_cast<size_t>(r * 2 + c)];
    // Rayleigh quotients of the pencil never undercut the reported minimum.
    for (int k = 0; k < 8; ++k) {
      Vec v = {rs.normal(), rs.normal()};
      const double quot = dot(v, matvec(theta, v)) / dot(v, matvec(a, v));
      CHECK(quot >= f.lambda_min[static_cast<size_t>(i)] - 1e-9);
    }
  }
  CHECK(f.inf_lambda == doctest::Approx(observed_inf).epsilon(1e-14));
  // The argmin actually attains the infimum.
  const Mat ta = assemble_theta(m, f.argmin);
  const double at_argmin =
      generalized_min_eigenvalue(ta, m.diffusion_matrix(f.argmin));
  CHECK(at_argmin == doctest::Approx(f.inf_lambda).epsilon(1e-10));
}

TEST_CASE("singular diffusion matrices are reported, not propagated") {
  DiffusionModel bad = build_ou(1, 1.0, 1.0);
  bad.sigma = [](const Vec& x) {
    Mat s(1, 1);
    s(0, 0) = x[0];  // vanishes at the origin
    return s;
  };
  bad.dsigma = [](const Vec&) {
    Tensor3 t(1, 1, 1);
    t(0, 0, 0) = 1.0;
    return t;
  };
  bad.d2sigma = [](const Vec&) { return Tensor4(1, 1, 1, 1); };
  CHECK_THROWS_AS((void)nibec_lambda(bad, GridSpec(-1.0, 1.0, 11)),
                  NumericalError);
}

TEST_CASE("rate-curve maximizer finds an interior quadratic maximum") {
  int evals = 0;
  const GaugeOptimum opt = maximize_rate_curve(
      [&evals](double e) {
        ++evals;
        return 0.7 - (e - 0.3) * (e - 0.3);
      },
      0.0, 1.0, 11, 20);
  CHECK(opt.best_eps == doctest::Approx(0.3).epsilon(5e-3));
  CHECK(opt.best_lambda == doctest::Approx(0.7).epsilon(1e-4));
  CHECK(static_cast<int>(opt.curve.size()) == evals);
  for (size_t k = 1; k < opt.curve.size(); ++k)
    CHECK(opt.curve[k].eps >= opt.curve[k - 1].eps);
  // Every reported evaluation is consistent with the function.
  for (const GaugeCurvePoint& p : opt.curve)
    CHECK(p.inf_lambda ==
          doctest::Approx(0.7 - (p.eps - 0.3) * (p.eps - 0.3)).epsilon(1e-12));
  // Endpoint maxima are found too.
  const GaugeOptimum edge =
      maximize_rate_curve([](double e) { return e; }, 0.0, 0.5, 6, 8);
  CHECK(edge.best_eps == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS_AS(
      (void)maximize_rate_curve([](double) { return 0.0; }, 0.5, 0.1, 5, 5),
      std::invalid_argument);
}

TEST_CASE("gauge optimization raises the certified rate of the first example") {
  const DiffusionModel base = build_example1(0.5, 0.0);
  const GridSpec grid(-1.5, 1.5, 31, -1.5, 1.5, 31);
  // Ungauged, the rate collapses at the origin (singular hessian).
  const ThetaField f0 = nibec_lambda(base, grid);
  CHECK(f0.inf_lambda <= 1e-10);
  const GaugeOptimum opt = optimize_gauge_rate(
      base, [](double e) { return example1_gauge(e); }, 0.02, 0.12, grid, 6, 6);
  CHECK(opt.best_lambda > 0.05);
  // The optimizer's report matches a direct evaluation at its winner.
  const ThetaField fb =
      nibec_lambda(rotation_gauge(base, example1_gauge(opt.best_eps)), grid);
  CHECK(fb.inf_lambda == doctest::Approx(opt.best_lambda).epsilon(1e-12));
}
