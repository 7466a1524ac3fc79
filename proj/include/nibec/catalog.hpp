#pragma once
// Ready-made diffusion models with analytic derivative fields: isotropic
// Ornstein-Uhlenbeck, a non-reversible OU family with divergence-free
// rotational drift, and two anisotropic gradient models whose Hessian
// degenerates (at a point, resp. on a region) so that the classic curvature
// criterion fails while a rotation gauge restores a positive certified rate.
// Every builder validates stationarity and derivative consistency before
// returning.

#include <map>
#include <string>
#include <vector>

#include "nibec/bakry_emery.hpp"
#include "nibec/entropy.hpp"
#include "nibec/model.hpp"

namespace nibec {

struct CatalogEntry {
  std::string name;
  std::string summary;
  std::string parameter_doc;                  // rendered by the CLI listing
  std::map<std::string, double> defaults;
  std::function<DiffusionModel(const std::map<std::string, double>&)> build;
};

// Fixed-order registry (stable across runs).
const std::vector<CatalogEntry>& catalog();

// Build by name; unknown names or parameters throw ConfigError.
DiffusionModel build_catalog_model(const std::string& name,
                                   const std::map<std::string, double>& params);

// Isotropic OU: b = -k x, sigma = s I, pinf ~ exp(-k|x|^2/s^2).
DiffusionModel build_ou(int dim, double k, double s);

// a = 2 nu I, b = -(Q x + J x), pinf ~ exp(-x*Qx/(2 nu)).  Requires tr J = 0
// and QJ antisymmetric so that the rotational part leaves pinf invariant; the
// curvature matrix is then nu(2Q - J - J*) in closed form.
DiffusionModel build_nonreversible_ou(double nu, const Mat& q, const Mat& j);

// V = x1^2 + |x1-x2|^(2+alpha) + |x2|^(2+alpha), b = -grad V, pinf ~ e^{-2V},
// with an optional rotation gauge of magnitude eps (eps = 0 keeps sigma = I).
DiffusionModel build_example1(double alpha, double eps);

// V = x1^2 + v_eps(x2) + v_eps(x1-x2) with v_eps(s) = eps^2 v(s/eps) built on
// the convex profile below (flat core, quadratic wings), plus the matching
// rotation gauge.  The Hessian is singular on a whole region around 0.
DiffusionModel build_example2(double eps);

// Scalar profile with two derivatives (cutoffs, potential wells).
struct ScalarProfile {
  ScalarFn f, d1, d2;
};

// Odd C2 cutoff: s on |s| <= 1, 0 on |s| >= 2, quintic join in between.
ScalarProfile plateau_cutoff();

// Odd C2 cutoff for the second example: slope exactly 1 on [0, eps], then a
// smooth descent to slope -m with m slightly under 2 eps/(1 - eps), a linear
// return and a closing ramp reaching 0 at s = 0.9.  Satisfies |f| <= 2 eps
// and -2 eps/(1-eps) <= f' <= 1; construction is checked numerically and
// throws on violation.
ScalarProfile descent_cutoff(double eps);

// Even convex C2 profile: 0 on [-1/4, 1/4], second derivative ramping to the
// constant 2 beyond |t| = 1/2.
ScalarProfile convex_well();

struct PotentialTriple {
  ScalarField v;
  VecField grad;
  MatField hess;
};

PotentialTriple example1_potential(double alpha);
PotentialTriple example2_potential(double eps);

// Rotation-angle families phi(x) = -eps * c_eps(x1) c_eps(x2) (first example,
// plateau cutoff scaled by eps) and phi(x) = -c_eps(x1) c_eps(x2) (second
// example, descent cutoff).
GaugeFamily example1_gauge(double eps);
GaugeFamily example2_gauge(double eps);

struct HessianEigenInfo {
  double gamma_minus = 0.0;  // exact smallest eigenvalue of hess V (example 1)
  double lower_bound = 0.0;  // min(kappa2, 2), never above gamma_minus
};

// Closed-form smallest Hessian eigenvalue of the first example's potential:
//   kappa1 = (2+alpha)(1+alpha)|x1-x2|^alpha, kappa2 = same with |x2|,
//   gamma- = 1 + kappa1 + kappa2/2 - sqrt(1 + kappa1^2 - kappa2 + kappa2^2/4).
HessianEigenInfo hessian_min_eigen(double alpha, const Vec& x);

// Infimum of the smallest Hessian eigenvalue outside the centered box of the
// given half width, where the gauge vanishes and Theta = hess V.  Uses the
// monotonicity of gamma- in (kappa1, kappa2) to reduce to a 1-D scan along
// the worst edge.  Certifies that grid truncation does not hide the infimum.
double example1_tail_infimum(double alpha, double half_width);

// Same role for the second example: outside any box containing the gauge
// support, at least one of the two curvature profiles saturates at 2 and the
// worst case over the remaining one evaluates to 3 - sqrt(5).
double example2_tail_infimum();

struct GrowthProbeRow {
  double radius = 0.0;
  double laplace_over_grad_sq = 0.0;  // max over angles of  lap V / |grad V|^2
  double inward_over_r_sq = 0.0;      // max of  (-x . grad V) / |x|^2
  double hess_norm_over_v = 0.0;      // max of  |hess V|_F / V
};

// Angular sweeps over spheres of the given radii; numerical evidence for the
// confinement/growth conditions the decay theory assumes at infinity.
std::vector<GrowthProbeRow> probe_growth_conditions(const PotentialTriple& v,
                                                    const std::vector<double>& radii,
                                                    int n_angles = 64);

}  // namespace nibec
