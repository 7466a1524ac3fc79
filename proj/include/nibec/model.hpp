#pragma once
// Time-homogeneous diffusion models dX = b(X) dt + sigma(X) dW with a known
// (unnormalized) stationary log-density.  All derivative fields are supplied
// analytically by the model builder; the audit below cross-checks them by
// finite differences.

#include <functional>
#include <string>
#include <vector>

#include "nibec/grid.hpp"
#include "nibec/linalg.hpp"
#include "nibec/rng.hpp"

namespace nibec {

using ScalarField = std::function<double(const Vec&)>;
using VecField = std::function<Vec(const Vec&)>;
using MatField = std::function<Mat(const Vec&)>;
using Tensor3Field = std::function<Tensor3(const Vec&)>;
using Tensor4Field = std::function<Tensor4(const Vec&)>;

struct DiffusionModel {
  std::string name;
  int dim = 0;        // state dimension d
  int noise_dim = 0;  // number of Brownian components d'
  VecField drift;            // b
  MatField drift_jacobian;   // (l, k) = d_k b_l
  MatField sigma;            // d x d'
  Tensor3Field dsigma;       // (m, l, i) = d_m sigma_{l i}
  Tensor4Field d2sigma;      // (m, k, l, i) = d_m d_k sigma_{l i}
  ScalarField log_pinf;      // unnormalized stationary log-density
  VecField grad_log_pinf;
  MatField hess_log_pinf;
  // Optional exact stationary sampler; reversed-time ensembles fall back to
  // rejection sampling over the recommended box when absent.
  std::function<Vec(RandomStream&)> sample_pinf;
  GridSpec recommended_grid;

  Mat diffusion_matrix(const Vec& x) const;  // a = sigma sigma^T
};

// Everything the pointwise curvature/stationarity algebra needs at one x.
struct DerivativeBundle {
  Vec x;
  Vec b;
  Mat jac_b;      // (l, k) = d_k b_l
  Mat sigma;
  Tensor3 dsigma;
  Tensor4 d2sigma;
  Mat a;          // sigma sigma^T
  Tensor3 da;     // (k, i, j) = d_k a_{ij}
  Tensor4 d2a;    // (m, k, i, j) = d_m d_k a_{ij}
  double log_p = 0.0;
  Vec grad_lp;
  Mat hess_lp;
};

DerivativeBundle diffusion_derivatives(const DiffusionModel& m, const Vec& x);

// Reversed-time drift of the stationary dynamics:
//   bbar_l = -b_l + sum_j d_j a_{lj} + sum_j a_{lj} d_j log pinf.
Vec reversed_drift(const DiffusionModel& m, const Vec& x);
Vec reversed_drift(const DerivativeBundle& d);
Mat reversed_drift_jacobian(const DiffusionModel& m, const Vec& x);

// Model of the reversed dynamics (same sigma and stationary density).
DiffusionModel make_reversed_model(const DiffusionModel& m);

struct StationarityResidual {
  double sup_norm = 0.0;  // relative to max grid value of pinf
  Vec argmax;
};

// Residual of the stationary equation
//   (1/2) sum_ij d_i d_j (a_ij pinf) - sum_i d_i (b_i pinf)
// expanded analytically through the model's derivative fields and scaled so
// that max_grid pinf = 1.
StationarityResidual stationarity_residual(const DiffusionModel& m,
                                           const GridSpec& grid);

struct FieldAudit {
  std::string field;
  double max_rel_dev = 0.0;
  Vec argmax;
};

// Central finite-difference check of every analytic derivative field at the
// given points.  Relative deviation uses scale max(1, |analytic|).
std::vector<FieldAudit> finite_difference_audit(const DiffusionModel& m,
                                                const std::vector<Vec>& points,
                                                double h = 1e-5);

}  // namespace nibec
