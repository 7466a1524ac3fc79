#include "nibec/entropy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nibec {

EntropyGenerator builtin_entropy(EntropyKind kind, double param) {
  EntropyGenerator g;
  switch (kind) {
    case EntropyKind::kl:
      g.name = "kl";
      g.u = [](double r) { return r > 0 ? r * std::log(r) - (r - 1.0) : 1.0; };
      g.du = [](double r) { return std::log(r); };
      g.d2u = [](double r) { return 1.0 / r; };
      g.d3u = [](double r) { return -1.0 / (r * r); };
      g.d4u = [](double r) { return 2.0 / (r * r * r); };
      g.u_at_zero = 1.0;
      return g;
    case EntropyKind::chi2:
      g.name = "chi2";
      g.u = [](double r) { return (r - 1.0) * (r - 1.0); };
      g.du = [](double r) { return 2.0 * (r - 1.0); };
      g.d2u = [](double) { return 2.0; };
      g.d3u = [](double) { return 0.0; };
      g.d4u = [](double) { return 0.0; };
      g.u_at_zero = 1.0;
      return g;
    case EntropyKind::tv:
      g.name = "tv";
      g.u = [](double r) { return std::abs(r - 1.0); };
      // Subgradient selection: 0 exactly at the crossing.
      g.du = [](double r) { return r > 1.0 ? 1.0 : (r < 1.0 ? -1.0 : 0.0); };
      g.d2u = nullptr;
      g.d3u = nullptr;
      g.d4u = nullptr;
      g.u_at_zero = 1.0;
      g.recession_slope = 1.0;
      g.smooth_c4 = false;
      return g;
    case EntropyKind::quartic:
      // Convex and normalized but violates the fourth-order derivative bound
      // everywhere away from r = 1; kept as the admissibility counterexample.
      g.name = "quartic";
      g.u = [](double r) { return std::pow(r - 1.0, 4); };
      g.du = [](double r) { return 4.0 * std::pow(r - 1.0, 3); };
      g.d2u = [](double r) { return 12.0 * (r - 1.0) * (r - 1.0); };
      g.d3u = [](double r) { return 24.0 * (r - 1.0); };
      g.d4u = [](double) { return 24.0; };
      g.u_at_zero = 1.0;
      return g;
    case EntropyKind::power: {
      const double b = param;
      if (!(b > 1.0 && b <= 2.0))
        throw std::invalid_argument("builtin_entropy: power exponent must lie in (1,2]");
      g.name = "power";
      g.u = [b](double r) {
        return r > 0 ? (std::pow(r, b) - b * r + b - 1.0) / (b * (b - 1.0))
                     : 1.0 / b;
      };
      g.du = [b](double r) { return (std::pow(r, b - 1.0) - 1.0) / (b - 1.0); };
      g.d2u = [b](double r) { return std::pow(r, b - 2.0); };
      g.d3u = [b](double r) { return (b - 2.0) * std::pow(r, b - 3.0); };
      g.d4u = [b](double r) { return (b - 2.0) * (b - 3.0) * std::pow(r, b - 4.0); };
      g.u_at_zero = 1.0 / b;
      return g;
    }
  }
  throw std::invalid_argument("builtin_entropy: unknown kind");
}

EntropyGenerator builtin_entropy(const std::string& kind, double param) {
  if (kind == "kl") return builtin_entropy(EntropyKind::kl);
  if (kind == "chi2") return builtin_entropy(EntropyKind::chi2);
  if (kind == "tv") return builtin_entropy(EntropyKind::tv);
  if (kind == "quartic") return builtin_entropy(EntropyKind::quartic);
  if (kind == "power") return builtin_entropy(EntropyKind::power, param);
  throw std::invalid_argument("builtin_entropy: unknown kind '" + kind + "'");
}

AdmissibilityReport check_admissibility(const EntropyGenerator& g,
                                        std::vector<double> samples) {
  AdmissibilityReport rep;
  if (samples.empty()) {
    for (int i = 0; i <= 120; ++i)
      samples.push_back(std::pow(10.0, -3.0 + 6.0 * i / 120.0));
  }
  if (!g.smooth_c4 || !g.d2u || !g.d3u || !g.d4u) {
    rep.reason = "generator lacks derivatives through fourth order";
    return rep;
  }
  constexpr double tol = 1e-12;
  rep.normalized = std::abs(g.u(1.0)) < tol && std::abs(g.du(1.0)) < tol;
  if (!rep.normalized) rep.reason = "U(1) or U'(1) nonzero";
  rep.convex = true;
  rep.derivative_bound = true;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (double r : samples) {
    const double u2 = g.d2u(r), u3 = g.d3u(r), u4 = g.d4u(r);
    if (u2 < -tol) {
      rep.convex = false;
      rep.reason = "U'' negative at r=" + std::to_string(r);
    }
    const double margin = 0.5 * u2 * u4 - u3 * u3;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_r = r;
    }
    if (margin < -tol * std::max(1.0, std::abs(u2 * u4))) {
      rep.derivative_bound = false;
      if (rep.reason.empty())
        rep.reason = "(U''')^2 exceeds U''U''''/2 at r=" + std::to_string(r);
    }
  }
  rep.admissible = rep.normalized && rep.convex && rep.derivative_bound;
  return rep;
}

}  // namespace nibec
