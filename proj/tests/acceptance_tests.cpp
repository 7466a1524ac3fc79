// End-to-end acceptance gate.  Each numbered criterion prints exactly one
// [PASS]/[FAIL] line; the process exits nonzero if any criterion fails.
// Tolerances are pinned here, next to the criterion they gate.
//
// Usage: acceptance_tests <path-to-cli-binary>
// The CLI path is only needed by the byte-determinism criterion; everything
// else runs in process against the library.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nibec/bakry_emery.hpp"
#include "nibec/catalog.hpp"
#include "nibec/csv.hpp"
#include "nibec/fokker_planck.hpp"
#include "nibec/functionals.hpp"
#include "nibec/monte_carlo.hpp"
#include "nibec/rng.hpp"

using namespace nibec;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_cli_path;

// Runs one criterion under a wall clock; exceptions count as failures.
void criterion(int number, const std::string& label, double budget_seconds,
               const std::function<bool(std::string&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (secs > budget_seconds) {
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += "over time budget";
  }
  std::ostringstream line;
  line << (ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": "
       << label;
  if (!detail.empty()) line << " -- " << detail;
  line.setf(std::ios::fixed);
  line.precision(1);
  line << " (" << secs << "s, budget " << budget_seconds << "s)";
  std::cout << line.str() << std::endl;
  if (!ok) ++g_failures;
}

std::vector<Vec> sample_box(int dim, double half, int count,
                            std::uint64_t seed) {
  RandomStream rs(seed, 0u);
  std::vector<Vec> pts;
  for (int k = 0; k < count; ++k) {
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = rs.uniform_in(-half, half);
    pts.push_back(x);
  }
  return pts;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in.good()) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return (raw == -1) ? -1 : WEXITSTATUS(raw);
}

GridDensity gaussian_on(const GridSpec& spec, double mean, double sd) {
  return project_density(spec, [mean, sd](const Vec& x) {
    const double z = (x[0] - mean) / sd;
    return std::exp(-0.5 * z * z);
  });
}

// Shared state: the decay trajectory of criterion 6 feeds criteria 7-9.
struct DecayRun {
  DiffusionModel model = build_ou(1, 1.0, 1.0);
  DensityTrajectory traj;
  TrajectoryDiagnostics diag;
  GridDensity pinf;
  bool ready = false;
};
DecayRun g_decay;

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance_tests <cli-binary>\n";
    return 2;
  }
  g_cli_path = argv[1];
  const fs::path work = fs::temp_directory_path() / "nibec_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  // ---------------------------------------------------------------- 1
  criterion(
      1, "curvature matrix of the nonreversible family matches its closed form",
      1.0, [](std::string& detail) {
        const double nu = 0.5;
        Mat q(2, 2), j(2, 2);
        q(0, 0) = 1.0;
        q(1, 1) = 4.0;
        j(0, 1) = -4.0;
        j(1, 0) = 1.0;
        const DiffusionModel m = build_nonreversible_ou(nu, q, j);
        // Closed form nu (2 hess V - F - F*) with hess V = Q / nu and the
        // rotational field F = J: constant matrix nu(2Q - J - J*).
        const Mat want = nu * (2.0 * q - (j + transpose(j)));
        double worst = 0.0;
        for (const Vec& x : sample_box(2, 3.0, 500, 1001u)) {
          const Mat got = assemble_theta(m, x);
          worst = std::max(worst, frobenius_norm(got - want));
        }
        detail = "max |Theta - closed form| = " + format_number(worst) +
                 " (tol 1e-10)";
        return worst < 1e-10;
      });

  // ---------------------------------------------------------------- 2
  criterion(
      2, "direct and reversed-drift assemblies agree on every catalog model",
      5.0, [](std::string& detail) {
        double worst = 0.0;
        for (const CatalogEntry& e : catalog()) {
          const DiffusionModel m = e.build(e.defaults);
          const double half = 0.55 * m.recommended_grid.hi[0];
          for (const Vec& x : sample_box(m.dim, half, 500, 1002u)) {
            const Mat t1 = assemble_theta(m, x);
            const Mat t2 = assemble_theta_sigma_form(m, x);
            worst = std::max(
                worst, frobenius_norm(t1 - t2) / (1.0 + frobenius_norm(t1)));
          }
        }
        detail = "max relative deviation = " + format_number(worst) +
                 " (tol 1e-8)";
        return worst < 1e-8;
      });

  // ---------------------------------------------------------------- 3
  criterion(
      3, "rotation-gauge closed form equals the assembler on the first example",
      5.0, [](std::string& detail) {
        const double alpha = 0.5, eps = 0.05;
        const PotentialTriple v = example1_potential(alpha);
        const GaugeFamily g = example1_gauge(eps);
        const DiffusionModel gauged =
            rotation_gauge(build_example1(alpha, 0.0), g);
        double worst = 0.0;
        for (const Vec& x : sample_box(2, 1.0, 500, 1003u)) {
          const Mat got = assemble_theta(gauged, x);
          const Mat want = theta_rotation_closed_form(
              v.grad(x), v.hess(x), g.grad_phi(x), g.hess_phi(x));
          worst = std::max(
              worst, frobenius_norm(got - want) / (1.0 + frobenius_norm(want)));
        }
        detail = "max relative deviation = " + format_number(worst) +
                 " (tol 1e-8)";
        return worst < 1e-8;
      });

  // ---------------------------------------------------------------- 4
  criterion(
      4, "first example: degenerate hessian at 0, gauged rate positive, tail safe",
      120.0, [](std::string& detail) {
        const double alpha = 0.5, eps = 0.05;
        // Exact degeneracy of the ungauged hessian at the origin.
        const PotentialTriple v = example1_potential(alpha);
        Eigen::Matrix2d h0;
        const Mat h = v.hess(Vec{0.0, 0.0});
        h0 << h(0, 0), h(0, 1), h(1, 0), h(1, 1);
        const double eig0 =
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(h0).eigenvalues()(0);
        if (eig0 != 0.0) {
          detail = "hessian eigenvalue at origin is " + format_number(eig0) +
                   ", expected exact 0";
          return false;
        }
        // Gauge-optimized grid infimum over [-3,3]^2 at 201^2 resolution.
        const DiffusionModel gauged = build_example1(alpha, eps);
        const GridSpec grid(-3.0, 3.0, 201, -3.0, 3.0, 201);
        const ThetaField f = nibec_lambda(gauged, grid);
        // Outside the grid the gauge vanishes and the curvature reduces to
        // the potential hessian; its exterior infimum must not undercut the
        // grid infimum, so truncation hides nothing.
        const double tail = example1_tail_infimum(alpha, 3.0);
        detail = "grid inf lambda = " + format_number(f.inf_lambda) +
                 " (needs > 0), tail inf = " + format_number(tail);
        return f.inf_lambda > 0.0 && tail >= f.inf_lambda - 1e-9;
      });

  // ---------------------------------------------------------------- 5
  criterion(
      5, "second example: gauge sweep certifies a rate of at least 0.70", 180.0,
      [](std::string& detail) {
        const GaugeOptimum opt = maximize_rate_curve(
            [](double e) {
              const DiffusionModel m = build_example2(e);
              return nibec_lambda(m, m.recommended_grid).inf_lambda;
            },
            0.01, 0.2, 8, 10);
        detail = "best eps = " + format_number(opt.best_eps) +
                 ", certified rate = " + format_number(opt.best_lambda) +
                 " (needs >= 0.70)";
        return opt.best_lambda >= 0.70;
      });

  // ---------------------------------------------------------------- 6
  criterion(
      6, "1-D OU entropy decay rates sit in [1.9, 2.1], information at least 1.9",
      60.0, [](std::string& detail) {
        const DiffusionModel& ou = g_decay.model;
        const GridSpec grid = ou.recommended_grid;  // [-4,4], 513 nodes
        const GridDensity p0 = gaussian_on(grid, 0.5, std::sqrt(0.5));
        g_decay.traj = evolve(ou, p0, 2.0, 8e-5, 250);  // snapshots 0.02 apart
        g_decay.diag = trajectory_diagnostics(ou, g_decay.traj);
        g_decay.pinf = project_density(grid, [&ou](const Vec& x) {
          return std::exp(ou.log_pinf(x));
        });
        g_decay.ready = true;
        const TrajectoryDiagnostics& d = g_decay.diag;
        const double r_hkl = decay_rate_fit(d.t, d.h_kl, 0.5, 2.0).rate;
        const double r_hc2 = decay_rate_fit(d.t, d.h_chi2, 0.5, 2.0).rate;
        const double r_ikl = decay_rate_fit(d.t, d.i_kl, 0.5, 2.0).rate;
        const double r_ic2 = decay_rate_fit(d.t, d.i_chi2, 0.5, 2.0).rate;
        detail = "H rates " + format_number(r_hkl) + ", " +
                 format_number(r_hc2) + "; I rates " + format_number(r_ikl) +
                 ", " + format_number(r_ic2);
        const bool h_ok = r_hkl > 1.9 && r_hkl < 2.1 && r_hc2 > 1.9 &&
                          r_hc2 < 2.1;
        const bool i_ok = r_ikl >= 1.9 && r_ic2 >= 1.9;
        return h_ok && i_ok;
      });

  // ---------------------------------------------------------------- 7
  criterion(
      7, "entropy production identity dH/dt = -I within 2 percent", 30.0,
      [](std::string& detail) {
        if (!g_decay.ready) {
          detail = "decay trajectory unavailable";
          return false;
        }
        const TrajectoryDiagnostics& d = g_decay.diag;
        // 10 checkpoints spread over [0.2, 1.9]; centred differences of H.
        double worst = 0.0;
        for (int c = 0; c < 10; ++c) {
          const size_t k = static_cast<size_t>(10 + c * 9);  // t = 0.2 .. 1.82
          const double dt2 = d.t[k + 1] - d.t[k - 1];
          const double dh_kl = (d.h_kl[k + 1] - d.h_kl[k - 1]) / dt2;
          const double dh_c2 = (d.h_chi2[k + 1] - d.h_chi2[k - 1]) / dt2;
          worst = std::max(worst, std::abs(dh_kl + d.i_kl[k]) / d.i_kl[k]);
          worst = std::max(worst, std::abs(dh_c2 + d.i_chi2[k]) / d.i_chi2[k]);
        }
        detail = "max relative mismatch = " + format_number(worst) +
                 " (tol 0.02)";
        return worst < 0.02;
      });

  // ---------------------------------------------------------------- 8
  criterion(
      8, "entropy never exceeds information over twice the certified rate",
      30.0, [](std::string& detail) {
        if (!g_decay.ready) {
          detail = "decay trajectory unavailable";
          return false;
        }
        const double lambda =
            nibec_lambda(g_decay.model, g_decay.model.recommended_grid)
                .inf_lambda;  // = 1 for the unit OU
        if (!(lambda > 0)) {
          detail = "certified rate not positive";
          return false;
        }
        const TrajectoryDiagnostics& d = g_decay.diag;
        double worst = 0.0;
        for (size_t k = 0; k < d.t.size(); ++k) {
          worst = std::max(worst, d.h_kl[k] * 2.0 * lambda / d.i_kl[k]);
          worst = std::max(worst, d.h_chi2[k] * 2.0 * lambda / d.i_chi2[k]);
        }
        detail = "max 2*lambda*H/I = " + format_number(worst) +
                 " (allowed 1.02)";
        return worst <= 1.02;
      });

  // ---------------------------------------------------------------- 9
  criterion(
      9, "total-variation slope matches its nonpositive dissipation form", 60.0,
      [](std::string& detail) {
        if (!g_decay.ready) {
          detail = "decay trajectory unavailable";
          return false;
        }
        const TrajectoryDiagnostics& d = g_decay.diag;
        // Sign first: the form must be nonpositive at every snapshot.
        double max_rhs = -1e300, worst_rel = 0.0;
        for (size_t k = 0; k < d.t.size(); ++k) {
          const ScalarResult rhs = tv_dissipation_rhs(
              g_decay.traj.density_at(static_cast<int>(k)), g_decay.pinf,
              g_decay.model);
          max_rhs = std::max(max_rhs, rhs.value);
          if (k >= 10 && k + 1 < d.t.size() && k % 9 == 1) {
            const double slope =
                (d.tv[k + 1] - d.tv[k - 1]) / (d.t[k + 1] - d.t[k - 1]);
            worst_rel = std::max(
                worst_rel, std::abs(slope - rhs.value) / std::abs(rhs.value));
          }
        }
        detail = "max form value = " + format_number(max_rhs) +
                 " (<= 0), max slope mismatch = " + format_number(worst_rel) +
                 " (tol 0.05)";
        return max_rhs <= 1e-12 && worst_rel < 0.05;
      });

  // ---------------------------------------------------------------- 10
  criterion(
      10, "reversed-path ratio: unit mean, entropy match, monotonicity, control",
      180.0, [](std::string& detail) {
        const DiffusionModel ou = build_ou(1, 1.0, 1.0);
        const GridSpec grid = ou.recommended_grid;
        const GridDensity pinf = project_density(
            grid, [&ou](const Vec& x) { return std::exp(ou.log_pinf(x)); });
        const GridDensity p0 = gaussian_on(grid, 1.0, std::sqrt(0.5));
        const double T = 2.0, mc_dt = 1e-3;
        const DensityTrajectory traj = evolve(ou, p0, T, 8e-5, 625);  // 0.05
        const PathEnsemble ens =
            simulate_reversed(ou, 100000, T, mc_dt, 7041776u, 50);
        const RatioSeries series = density_ratio_process(ens, traj, pinf);
        const EntropyGenerator kl = builtin_entropy("kl");
        const EntropyGenerator chi2 = builtin_entropy("chi2");
        std::vector<double> h_kl, h_kl_err, h_chi2, h_chi2_err;
        for (double t : series.times) {
          const GridDensity pt =
              traj.density_at(traj.index_of_time(T - t));
          const ScalarResult hk = evaluate_entropy(kl, pt, pinf);
          const ScalarResult hc = evaluate_entropy(chi2, pt, pinf);
          h_kl.push_back(hk.value);
          h_kl_err.push_back(hk.error_estimate);
          h_chi2.push_back(hc.value);
          h_chi2_err.push_back(hc.error_estimate);
        }
        const MartingaleReport rk =
            martingale_diagnostics(series, kl, h_kl, h_kl_err);
        const MartingaleReport rc =
            martingale_diagnostics(series, chi2, h_chi2, h_chi2_err);
        // Deliberately wrong drift must blow the unit-mean property apart.
        VecField wrong = [&ou](const Vec& x) {
          Vec b = reversed_drift(ou, x);
          b[0] += 0.3;
          return b;
        };
        const PathEnsemble bad_ens =
            simulate_reversed(ou, 20000, T, mc_dt, 7041777u, 50, wrong);
        const RatioSeries bad = density_ratio_process(bad_ens, traj, pinf);
        const MartingaleReport rb = martingale_diagnostics(bad, kl);
        detail = "max |mean-1|/se = " + format_number(rk.max_abs_drift_z) +
                 " (<3), entropy z = " +
                 format_number(std::max(rk.max_consistency_z,
                                        rc.max_consistency_z)) +
                 " (<3), monotonicity violations = " +
                 std::to_string(rk.submartingale_violations +
                                rc.submartingale_violations) +
                 " (0), control z = " + format_number(rb.max_abs_drift_z) +
                 " (>4)";
        return ens.blown_up_count == 0 && rk.max_abs_drift_z < 3.0 &&
               rk.max_consistency_z < 3.0 && rc.max_consistency_z < 3.0 &&
               rk.submartingale_violations == 0 &&
               rc.submartingale_violations == 0 &&
               series.clamped_fraction < 1e-3 && rb.max_abs_drift_z > 4.0;
      });

  // ---------------------------------------------------------------- 11
  criterion(
      11, "exponential reconstruction converges to the pathwise ratio", 180.0,
      [](std::string& detail) {
        const DiffusionModel ou = build_ou(1, 1.0, 1.0);
        const GridSpec grid = ou.recommended_grid;
        const GridDensity pinf = project_density(
            grid, [&ou](const Vec& x) { return std::exp(ou.log_pinf(x)); });
        const GridDensity p0 = gaussian_on(grid, 1.0, std::sqrt(0.5));
        const double T = 0.5;
        const DensityTrajectory traj = evolve(ou, p0, T, 5e-5, 2);  // 1e-4
        const auto median_dev = [&](double dt, std::uint64_t seed) {
          const PathEnsemble ens = simulate_reversed(ou, 512, T, dt, seed, 1);
          const RatioSeries direct = density_ratio_process(ens, traj, pinf);
          const RatioSeries gir =
              exponential_girsanov_process(ou, ens, traj, pinf);
          const int last = static_cast<int>(gir.times.size()) - 1;
          std::vector<double> devs;
          for (int p = 0; p < ens.n_paths; ++p) {
            if (direct.hit_zero_index[static_cast<size_t>(p)] >= 0) continue;
            const double d0 = direct.at(p, last);
            devs.push_back(std::abs(gir.at(p, last) - d0) / d0);
          }
          std::sort(devs.begin(), devs.end());
          return devs[devs.size() / 2];
        };
        const double med_fine = median_dev(1e-4, 911u);
        const double med_coarse = median_dev(4e-4, 913u);
        detail = "median relative deviation " + format_number(med_fine) +
                 " at dt=1e-4 (tol 0.05), " + format_number(med_coarse) +
                 " at dt=4e-4 (must exceed the fine run)";
        return med_fine < 0.05 && med_coarse > med_fine;
      });

  // ---------------------------------------------------------------- 12
  criterion(
      12, "structure matrices: Gamma PSD, entropy weights PSD, pairing >= 0",
      60.0, [](std::string& detail) {
        const DiffusionModel m = build_catalog_model("example1", {});
        RandomStream rs(4242u, 0u);
        double min_gamma = 1e300, min_pair = 1e300, min_weight = 1e300;
        for (int k = 0; k < 1000; ++k) {
          const Vec x = {rs.uniform_in(-1.5, 1.5), rs.uniform_in(-1.5, 1.5)};
          const DerivativeBundle d = diffusion_derivatives(m, x);
          Vec grad(2);
          Mat hess(2, 2);
          grad[0] = rs.normal();
          grad[1] = rs.normal();
          hess(0, 0) = rs.normal();
          hess(1, 1) = rs.normal();
          hess(0, 1) = hess(1, 0) = rs.normal();
          const double r = rs.uniform_in(0.0, 5.0);
          const double delta = rs.uniform_in(1e-3, 0.5);
          for (const char* gen : {"kl", "chi2"}) {
            const GammaPair gp = structure_pair(d, grad, hess,
                                                builtin_entropy(gen), r, delta);
            const double gscale = 1.0 + frobenius_norm(gp.gamma);
            const double wscale = 1.0 + frobenius_norm(gp.lambda_delta);
            min_gamma =
                std::min(min_gamma, sym_min_eigenvalue(gp.gamma) / gscale);
            min_weight = std::min(
                min_weight, sym_min_eigenvalue(gp.lambda_delta) / wscale);
            min_pair =
                std::min(min_pair, gp.trace_product / (gscale * wscale));
          }
        }
        detail = "min scaled eigenvalues: Gamma " + format_number(min_gamma) +
                 ", weights " + format_number(min_weight) + ", pairing " +
                 format_number(min_pair) + " (all >= -1e-10)";
        return min_gamma >= -1e-10 && min_weight >= -1e-10 &&
               min_pair >= -1e-10;
      });

  // ---------------------------------------------------------------- 13
  criterion(
      13, "closed-form hessian eigenvalue matches a numeric solve with bound",
      30.0, [](std::string& detail) {
        RandomStream rs(1313u, 0u);
        double worst = 0.0;
        bool bound_ok = true;
        for (int k = 0; k < 1000; ++k) {
          const double alpha = rs.uniform_in(0.1, 0.9);
          const Vec x = {rs.uniform_in(-3, 3), rs.uniform_in(-3, 3)};
          const Mat h = example1_potential(alpha).hess(x);
          Eigen::Matrix2d eh;
          eh << h(0, 0), h(0, 1), h(1, 0), h(1, 1);
          const double num =
              Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(eh).eigenvalues()(
                  0);
          const HessianEigenInfo info = hessian_min_eigen(alpha, x);
          worst = std::max(worst,
                           std::abs(info.gamma_minus - num) / (1.0 + std::abs(num)));
          if (info.lower_bound > info.gamma_minus + 1e-12) bound_ok = false;
        }
        detail = "max relative deviation = " + format_number(worst) +
                 " (tol 1e-10), lower bound respected: " +
                 (bound_ok ? "yes" : "no");
        return worst < 1e-10 && bound_ok;
      });

  // ---------------------------------------------------------------- 14
  criterion(
      14, "identical config and seed reproduce artifacts byte for byte", 240.0,
      [work](std::string& detail) {
        // One deterministic grid experiment and one Monte Carlo experiment.
        const std::string scan_body =
            "experiment = theta-scan\nmodel = example1\nmodel.alpha = 0.5\n"
            "model.eps = 0.05\ngrid_n = 51\n";
        const std::string mc_body =
            "experiment = mc-martingale\nmodel = ou1d\nT = 0.5\n"
            "mc_dt = 1e-3\nrecord_every = 100\nn_paths = 2000\nseed = 99\n"
            "fp_dt = 8e-5\ninit_mean = 1.0\ninit_sd = 0.7071067811865476\n"
            "control = false\ndrift_z_max = 6\nconsistency_z_max = 6\n"
            "submartingale_max = 2\n";
        const std::vector<std::pair<std::string, std::string>> jobs = {
            {"scan", scan_body}, {"mc", mc_body}};
        for (const auto& [tag, body] : jobs) {
          for (int pass = 0; pass < 2; ++pass) {
            const fs::path out = work / (tag + std::to_string(pass));
            const fs::path cfg = work / (tag + std::to_string(pass) + ".cfg");
            std::ofstream(cfg) << body << "output_dir = " << out.string()
                               << "\n";
            const int code = run_cli("run " + cfg.string());
            if (code != 0) {
              detail = tag + " run exited with " + std::to_string(code);
              return false;
            }
          }
          size_t compared = 0;
          for (const auto& entry :
               fs::directory_iterator(work / (tag + "0"))) {
            const fs::path a = entry.path();
            const fs::path b = work / (tag + "1") / a.filename();
            if (!fs::exists(b)) {
              detail = "missing artifact " + b.string();
              return false;
            }
            if (slurp(a) != slurp(b)) {
              detail = "artifact differs between runs: " +
                       a.filename().string();
              return false;
            }
            ++compared;
          }
          if (compared == 0) {
            detail = "no artifacts produced for " + tag;
            return false;
          }
        }
        detail = "grid scan and Monte Carlo artifacts identical across reruns";
        return true;
      });

  std::cout << (g_failures == 0 ? "ACCEPTANCE: all criteria passed"
                                : "ACCEPTANCE: " + std::to_string(g_failures) +
                                      " criterion/criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
