#pragma once
// Convex entropy generators U on (0, +inf) normalized so that U(1) = 0 and,
// when differentiable there, U'(1) = 0.  Higher derivatives (through fourth
// order) feed the curvature certificates; generators that lack them (the
// total-variation kernel) mark those slots unavailable.

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace nibec {

using ScalarFn = std::function<double(double)>;

struct EntropyGenerator {
  std::string name;
  ScalarFn u;      // U(r), r > 0
  ScalarFn du;     // U'(r); for tv the subgradient with value 0 at r = 1
  ScalarFn d2u;    // nullptr when unavailable
  ScalarFn d3u;
  ScalarFn d4u;
  double u_at_zero = 0.0;   // lim_{r->0+} U(r)
  double delta_u_zero = 0.0;  // jump of U at 0 (0 for every builtin)
  // lim_{r->inf} U(r)/r; weights mass sitting where the reference density
  // vanishes (+inf for every builtin except tv, whose value is 1).
  double recession_slope = std::numeric_limits<double>::infinity();
  bool smooth_c4 = true;    // false for tv
};

enum class EntropyKind { kl, chi2, tv, power, quartic };

// `param` is only read for power (the exponent beta, in (1, 2]).
EntropyGenerator builtin_entropy(EntropyKind kind, double param = 0.0);
EntropyGenerator builtin_entropy(const std::string& kind, double param = 0.0);

struct AdmissibilityReport {
  bool normalized = false;       // U(1) = 0 and U'(1) = 0
  bool convex = false;           // U'' >= 0 at all samples
  bool derivative_bound = false; // (U''')^2 <= (1/2) U'' U'''' at all samples
  bool admissible = false;
  double worst_margin = 0.0;     // min over samples of (1/2) U'' U'''' - (U''')^2
  double worst_r = 0.0;
  std::string reason;
};

// Evaluates the pointwise admissibility inequality on the given abscissae
// (defaults to a log-spaced set in [1e-3, 1e3] when `samples` is empty).
AdmissibilityReport check_admissibility(const EntropyGenerator& u,
                                        std::vector<double> samples = {});

}  // namespace nibec
