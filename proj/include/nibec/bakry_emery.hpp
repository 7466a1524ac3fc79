#pragma once
// Pointwise curvature matrix Theta of a stationary diffusion, assembled two
// independent ways for cross-validation, the (Gamma, Lambda_delta) pair of
// quadratic forms entering the Fisher-information dissipation, the
// generalized-eigenvalue field certifying Theta >= lambda a on a grid, and a
// one-parameter rotation-gauge optimizer for the certified rate.

#include <functional>
#include <string>
#include <vector>

#include "nibec/entropy.hpp"
#include "nibec/grid.hpp"
#include "nibec/linalg.hpp"
#include "nibec/model.hpp"

namespace nibec {

// Theta via the nine term groups in (b, sigma, their derivatives, log pinf).
// The expression is symmetric analytically; asymmetry beyond 1e-10 (relative
// to the matrix norm) indicates a broken model derivative and throws.
Mat assemble_theta(const DerivativeBundle& d);
Mat assemble_theta(const DiffusionModel& m, const Vec& x);

// Independent assembly through the reversed drift: build Sigma (whose
// symmetric part is Theta) from bbar, its Jacobian, and a divergence term
// carrying the stationary weight.  Agreement with assemble_theta is a strong
// whole-pipeline check, since this route exercises different derivatives.
Mat assemble_theta_sigma_form(const DiffusionModel& m, const Vec& x);

// Pathwise quadratic forms for a scalar observable rho at one point:
//   w_i   = sigma_{li} d_l rho
//   G_ij  = sigma_{kj} sigma_{li} d_kl rho
//           + (1/2)(sigma_{kj} d_k sigma_{li} + sigma_{ki} d_k sigma_{lj}) d_l rho
//   Gamma = [[ sum G_ij^2, sum w_i w_j G_ij ], [ ., (sum w_i^2)^2 ]]
// Gamma is positive semidefinite by Cauchy-Schwarz.
Mat gamma_matrix(const DerivativeBundle& d, const Vec& grad_rho,
                 const Mat& hess_rho);

// Shifted entropy weight matrix
//   [[ U''(r+delta), U'''(r+delta) ], [ U'''(r+delta), U''''(r+delta)/2 ]],
// positive semidefinite exactly when the generator satisfies the fourth-order
// admissibility bound.  Requires r >= 0, delta > 0 and four derivatives.
Mat lambda_delta_matrix(const EntropyGenerator& u, double r, double delta);

struct GammaPair {
  Mat gamma;         // 2x2, PSD up to round-off
  Mat lambda_delta;  // 2x2, PSD for admissible generators
  double trace_product = 0.0;  // tr(lambda_delta * gamma)
};

GammaPair structure_pair(const DerivativeBundle& d, const Vec& grad_rho,
                         const Mat& hess_rho, const EntropyGenerator& u,
                         double r, double delta);

// Per-node Theta and the generalized eigenvalue lambda_min(x): the largest
// lambda with Theta(x) >= lambda a(x), computed through the symmetric square
// root of a.  inf_lambda is the grid infimum (the certified rate candidate).
struct ThetaField {
  GridSpec grid;
  int dim = 0;
  std::vector<double> theta;       // [node][l * dim + l']
  std::vector<double> lambda_min;  // [node]
  double inf_lambda = 0.0;
  Vec argmin;
};

ThetaField nibec_lambda(const DiffusionModel& m, const GridSpec& grid);

// One-parameter family of rotation angles phi with analytic derivatives.
struct GaugeFamily {
  std::string kind;  // reporting label, e.g. "rotation2d"
  double eps = 0.0;
  ScalarField phi;
  VecField grad_phi;
  MatField hess_phi;
};

// Replace sigma == I2 by the pointwise rotation R(phi(x)).  The law of the
// process is unchanged (a, b, pinf identical); only Theta moves.
DiffusionModel rotation_gauge(const DiffusionModel& base, const GaugeFamily& g);

// Closed-form Theta for the 2-D gradient base b = -grad V, a = I2 under the
// rotation gauge, in terms of first/second derivatives of V and phi only.
// Serves as the keystone oracle for the general assembler.
Mat theta_rotation_closed_form(const Vec& grad_v, const Mat& hess_v,
                               const Vec& grad_phi, const Mat& hess_phi);

// Position-weighted criterion matrix
//   Theta^alpha = alpha Theta
//     - (1/2) d_k alpha ([sigma_{l'i}a_{mk} - sigma_{ki}a_{ml'}] d_m sigma_{li}
//                      + [sigma_{li}a_{mk} - sigma_{ki}a_{ml}] d_m sigma_{l'i}).
// alpha must lie in [0,1] at x.
Mat mixed_criterion_theta(const DiffusionModel& m, const Vec& x, double alpha,
                          const Vec& grad_alpha);

struct GaugeCurvePoint {
  double eps = 0.0;
  double inf_lambda = 0.0;
};

struct GaugeOptimum {
  double best_eps = 0.0;
  double best_lambda = 0.0;
  std::vector<GaugeCurvePoint> curve;  // every evaluation, sorted by eps
};

// Maximize an arbitrary rate curve eps -> lambda over [eps_lo, eps_hi]:
// coarse sweep, then golden-section refinement of the bracket around the
// coarse maximum.  Deterministic; every evaluation lands in the curve.
GaugeOptimum maximize_rate_curve(const std::function<double(double)>& lambda_of_eps,
                                 double eps_lo, double eps_hi,
                                 int coarse_points = 9, int refine_evals = 12);

// Maximize eps -> inf_lambda(rotation_gauge(base, family(eps))) over
// [eps_lo, eps_hi] via maximize_rate_curve.
GaugeOptimum optimize_gauge_rate(const DiffusionModel& base,
                                 const std::function<GaugeFamily(double)>& family,
                                 double eps_lo, double eps_hi,
                                 const GridSpec& grid, int coarse_points = 9,
                                 int refine_evals = 12);

}  // namespace nibec
