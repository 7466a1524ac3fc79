#pragma once
// Grid evaluation of relative-entropy functionals, the weighted Fisher
// information, total variation, and the signed dissipation form driving the
// total-variation decay.

#include "nibec/entropy.hpp"
#include "nibec/grid.hpp"
#include "nibec/model.hpp"

namespace nibec {

struct ScalarResult {
  double value = 0.0;
  // Richardson-style quadrature error estimate from a 2x-coarsened sum.
  double error_estimate = 0.0;
  bool infinite = false;
  bool mass_defect = false;  // boundary-mass warning or mass off unit
};

// Nodes where the reference density vanishes are weighted by the recession
// slope of U (ratio-free), so e.g. kl reports +inf when p puts mass there.
ScalarResult evaluate_entropy(const EntropyGenerator& u, const GridDensity& p,
                              const GridDensity& q);

// (1/2) sum over nodes with p/q > ratio_floor of
//   U''(p/q) grad(p/q)^T a(x) grad(p/q) q dV,
// with centred interior differences and one-sided boundary stencils.
// Requires U'' (throws std::invalid_argument for tv) and q > 0 on interior
// nodes.
ScalarResult evaluate_fisher(const EntropyGenerator& u, const GridDensity& p,
                             const GridDensity& q, const DiffusionModel& model,
                             double ratio_floor = 1e-14);

// Unhalved convention: integral of |p - q|, so the value lies in [0, 2].
ScalarResult total_variation(const GridDensity& p, const GridDensity& q);

// Discrete form of (1/2) integral of sgn(p/q - 1) div(a grad(p/q) q) with
// sgn(0) = 0 and zero-flux boundaries; nonpositive by construction for
// diagonal diffusion matrices.
ScalarResult tv_dissipation_rhs(const GridDensity& p, const GridDensity& q,
                                const DiffusionModel& model);

}  // namespace nibec
