#include "nibec/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <vector>

#include "nibec/bakry_emery.hpp"
#include "nibec/catalog.hpp"
#include "nibec/csv.hpp"
#include "nibec/errors.hpp"
#include "nibec/fokker_planck.hpp"
#include "nibec/functionals.hpp"
#include "nibec/monte_carlo.hpp"

namespace nibec {

namespace {

std::string fmt(double v) { return format_number(v); }

// Accumulates check rows, echoes them, and writes verdict.csv
// (columns check, value, threshold, pass) at the end of the experiment.
class VerdictTable {
 public:
  explicit VerdictTable(std::string dir) : dir_(std::move(dir)) {}

  void check(const std::string& name, double value, const std::string& threshold,
             bool pass) {
    rows_.push_back({name, fmt(value), threshold, pass ? "1" : "0"});
    all_ = all_ && pass;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << " = " << fmt(value)
              << "  (" << threshold << ")\n";
  }

  void note(const std::string& name, double value) {
    rows_.push_back({name, fmt(value), "none", "1"});
    std::cout << "[info] " << name << " = " << fmt(value) << "\n";
  }

  void fail_note(const std::string& name, const std::string& text) {
    rows_.push_back({name, text, "none", "0"});
    all_ = false;
    std::cout << "[FAIL] " << name << ": " << text << "\n";
  }

  bool all_passed() const { return all_; }

  void write() const {
    CsvWriter out(dir_ + "/verdict.csv", {"check", "value", "threshold", "pass"});
    for (const auto& r : rows_) out.row({r[0], r[1], r[2], r[3]});
    out.close();
  }

 private:
  std::string dir_;
  std::vector<std::array<std::string, 4>> rows_;
  bool all_ = true;
};

struct ResolvedModel {
  std::string name;
  std::map<std::string, double> params;  // defaults merged with overrides
  DiffusionModel model;
};

// Reads `model` plus `model.<param>` keys, merges over the catalog defaults
// and builds (parameter-range violations surface as config errors).
ResolvedModel resolve_model(Config& cfg) {
  ResolvedModel rm;
  rm.name = cfg.get_string("model");
  const CatalogEntry* entry = nullptr;
  for (const CatalogEntry& e : catalog())
    if (e.name == rm.name) entry = &e;
  if (!entry) throw ConfigError("unknown catalog model '" + rm.name + "'");
  rm.params = entry->defaults;
  for (const std::string& key : cfg.keys_with_prefix("model.")) {
    const std::string param = key.substr(6);
    if (rm.params.find(param) == rm.params.end())
      throw ConfigError("model '" + rm.name + "' has no parameter '" + param + "'");
    rm.params[param] = cfg.get_double(key);
  }
  try {
    rm.model = entry->build(rm.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model '") + rm.name + "': " + e.what());
  }
  return rm;
}

// Recommended grid, with an optional per-axis node-count override.
GridSpec resolve_grid(Config& cfg, const DiffusionModel& m) {
  GridSpec g = m.recommended_grid;
  if (cfg.has("grid_n")) {
    const int n = cfg.get_int("grid_n");
    if (n < 9) throw ConfigError("grid_n must be at least 9");
    for (int a = 0; a < g.dim; ++a) g.n[static_cast<size_t>(a)] = n;
  }
  return g;
}

GridDensity gaussian_density(const GridSpec& grid, const std::vector<double>& mean,
                             const std::vector<double>& sd) {
  if (static_cast<int>(mean.size()) != grid.dim ||
      static_cast<int>(sd.size()) != grid.dim)
    throw ConfigError("init_mean / init_sd must have one entry per dimension");
  for (double s : sd)
    if (!(s > 0.0)) throw ConfigError("init_sd entries must be positive");
  return project_density(grid, [&](const Vec& x) {
    double e = 0.0;
    for (int c = 0; c < grid.dim; ++c) {
      const double z = (x[c] - mean[static_cast<size_t>(c)]) / sd[static_cast<size_t>(c)];
      e += 0.5 * z * z;
    }
    return std::exp(-e);
  });
}

GridDensity stationary_density(const DiffusionModel& m, const GridSpec& grid) {
  return project_density(grid, [&](const Vec& x) { return std::exp(m.log_pinf(x)); });
}

void require_positive(double v, const std::string& key) {
  if (!(v > 0.0)) throw ConfigError("key '" + key + "' must be positive");
}

// ---------------------------------------------------------------------------
// theta-scan: assemble Theta over the grid, export the field, certify the
// rate, optionally validate box truncation with the model's exact tail bound.

bool run_theta_scan(Config& cfg, const std::string& dir) {
  ResolvedModel rm = resolve_model(cfg);
  const GridSpec grid = resolve_grid(cfg, rm.model);
  const bool has_expect = cfg.has("expect_inf_lambda");
  const double expect = cfg.get_double("expect_inf_lambda", 0.0);
  const double expect_tol = cfg.get_double("expect_tol", 1e-6);
  const bool has_min = cfg.has("min_inf_lambda");
  const double min_lambda = cfg.get_double("min_inf_lambda", 0.0);
  const std::string tail = cfg.get_string("tail", "");
  if (!tail.empty() && tail != rm.name)
    throw ConfigError("tail bound '" + tail + "' only applies to that model");
  cfg.finish();

  std::filesystem::create_directories(dir);
  VerdictTable v(dir);
  try {
    const ThetaField tf = nibec_lambda(rm.model, grid);
    CsvWriter out(dir + "/theta_field.csv",
                  {"x1", "x2", "theta_11", "theta_12", "theta_22", "lambda_min"});
    const int d = tf.dim;
    for (int idx = 0; idx < grid.node_count(); ++idx) {
      const Vec x = grid.node_flat(idx);
      const size_t base = static_cast<size_t>(idx) * d * d;
      const double t11 = tf.theta[base];
      const double t12 = d == 2 ? tf.theta[base + 1] : 0.0;
      const double t22 = d == 2 ? tf.theta[base + 3] : 0.0;
      out.row({fmt(x[0]), fmt(d == 2 ? x[1] : 0.0), fmt(t11), fmt(t12), fmt(t22),
               fmt(tf.lambda_min[static_cast<size_t>(idx)])});
    }
    out.close();

    v.note("inf_lambda", tf.inf_lambda);
    v.note("argmin_x1", tf.argmin[0]);
    if (d == 2) v.note("argmin_x2", tf.argmin[1]);
    if (has_expect)
      v.check("inf_lambda_expected", tf.inf_lambda,
              "|value - " + fmt(expect) + "| <= " + fmt(expect_tol),
              std::abs(tf.inf_lambda - expect) <= expect_tol);
    if (has_min)
      v.check("inf_lambda_min", tf.inf_lambda, ">= " + fmt(min_lambda),
              tf.inf_lambda >= min_lambda);
    if (tail == "example1") {
      const double tail_inf = example1_tail_infimum(rm.params.at("alpha"), grid.hi[0]);
      v.check("tail_infimum", tail_inf, ">= grid inf " + fmt(tf.inf_lambda),
              tail_inf >= tf.inf_lambda - 1e-9);
    } else if (tail == "example2") {
      const double tail_inf = example2_tail_infimum();
      v.check("tail_infimum", tail_inf, ">= grid inf " + fmt(tf.inf_lambda),
              tail_inf >= tf.inf_lambda - 1e-9);
    }
  } catch (const std::exception& e) {
    v.fail_note("aborted", e.what());
    v.write();
    throw;
  }
  v.write();
  return v.all_passed();
}

// ---------------------------------------------------------------------------
// gauge-optimize: sweep the rotation-gauge magnitude and report the best
// certified rate.  For the flat-core model the potential scales with eps too,
// so the whole model is rebuilt per evaluation.

bool run_gauge_optimize(Config& cfg, const std::string& dir) {
  const std::string name = cfg.get_string("model");
  if (name != "example1" && name != "example2")
    throw ConfigError("gauge-optimize supports the example1 / example2 models");
  for (const std::string& key : cfg.keys_with_prefix("model."))
    if (key == "model.eps")
      throw ConfigError("gauge-optimize controls eps itself; drop model.eps");
  double alpha = 0.5;
  if (name == "example1" && cfg.has("model.alpha")) alpha = cfg.get_double("model.alpha");
  const double eps_lo = cfg.get_double("eps_lo");
  const double eps_hi = cfg.get_double("eps_hi");
  if (!(0.0 <= eps_lo && eps_lo < eps_hi && eps_hi < 1.0 / 3.0))
    throw ConfigError("need 0 <= eps_lo < eps_hi < 1/3");
  const int coarse_points = cfg.get_int("coarse_points", 9);
  const int refine_evals = cfg.get_int("refine_evals", 12);
  if (coarse_points < 3 || refine_evals < 2)
    throw ConfigError("need coarse_points >= 3 and refine_evals >= 2");
  const bool has_min = cfg.has("min_best_lambda");
  const double min_best = cfg.get_double("min_best_lambda", 0.0);
  const int grid_n = cfg.get_int("grid_n", 0);
  if (cfg.has("grid_n") && grid_n < 9) throw ConfigError("grid_n must be at least 9");
  cfg.finish();

  DiffusionModel base;
  try {
    base = name == "example1" ? build_example1(alpha, 0.0) : build_example2(eps_hi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model '") + name + "': " + e.what());
  }
  GridSpec grid = base.recommended_grid;
  if (grid_n > 0)
    for (int a = 0; a < grid.dim; ++a) grid.n[static_cast<size_t>(a)] = grid_n;

  std::filesystem::create_directories(dir);
  VerdictTable v(dir);
  try {
    std::function<double(double)> rate;
    if (name == "example1") {
      rate = [&](double eps) {
        return nibec_lambda(rotation_gauge(base, example1_gauge(eps)), grid).inf_lambda;
      };
    } else {
      rate = [&](double eps) {
        return nibec_lambda(build_example2(eps), grid).inf_lambda;
      };
    }
    const GaugeOptimum opt =
        maximize_rate_curve(rate, eps_lo, eps_hi, coarse_points, refine_evals);

    CsvWriter out(dir + "/gauge_sweep.csv", {"eps", "inf_lambda"});
    for (const GaugeCurvePoint& p : opt.curve) out.row({fmt(p.eps), fmt(p.inf_lambda)});
    out.close();

    v.note("best_eps", opt.best_eps);
    v.note("best_lambda", opt.best_lambda);
    v.note("evaluations", static_cast<double>(opt.curve.size()));
    if (has_min)
      v.check("best_lambda_min", opt.best_lambda, ">= " + fmt(min_best),
              opt.best_lambda >= min_best);
  } catch (const std::exception& e) {
    v.fail_note("aborted", e.what());
    v.write();
    throw;
  }
  v.write();
  return v.all_passed();
}

// ---------------------------------------------------------------------------
// Shared setup for the trajectory-based experiments: evolve a Gaussian start
// under the forward equation and read out the diagnostics.

struct TrajectorySetup {
  ResolvedModel rm;
  GridSpec grid;
  double T = 0.0, dt = 0.0;
  int snapshot_every = 1;
  std::vector<double> init_mean, init_sd;
};

TrajectorySetup read_trajectory_setup(Config& cfg) {
  TrajectorySetup s;
  s.rm = resolve_model(cfg);
  s.grid = resolve_grid(cfg, s.rm.model);
  s.T = cfg.get_double("T");
  require_positive(s.T, "T");
  s.dt = cfg.get_double("dt");
  require_positive(s.dt, "dt");
  s.snapshot_every = cfg.get_int("snapshot_every", 100);
  if (s.snapshot_every < 1) throw ConfigError("snapshot_every must be >= 1");
  s.init_mean = cfg.get_double_list("init_mean");
  s.init_sd = cfg.get_double_list("init_sd");
  return s;
}

DensityTrajectory evolve_setup(const TrajectorySetup& s, TrajectoryDiagnostics* diag) {
  const GridDensity p0 = gaussian_density(s.grid, s.init_mean, s.init_sd);
  DensityTrajectory traj = evolve(s.rm.model, p0, s.T, s.dt, s.snapshot_every);
  if (diag) *diag = trajectory_diagnostics(s.rm.model, traj);
  return traj;
}

void write_trajectory_csv(const std::string& dir, const TrajectoryDiagnostics& d) {
  CsvWriter out(dir + "/trajectory.csv",
                {"t", "H_kl", "H_chi2", "I_kl", "I_chi2", "TV", "mass_defect"});
  for (size_t k = 0; k < d.t.size(); ++k)
    out.row({fmt(d.t[k]), fmt(d.h_kl[k]), fmt(d.h_chi2[k]), fmt(d.i_kl[k]),
             fmt(d.i_chi2[k]), fmt(d.tv[k]), fmt(d.mass_defect[k])});
  out.close();
}

// Snapshot indices (with both neighbours recorded) spread evenly over
// [t_min, T); used by the centered-difference identity checks.
std::vector<size_t> pick_checkpoints(const std::vector<double>& t, double t_min,
                                     int count) {
  size_t lo = 1;
  while (lo < t.size() && t[lo] < t_min) ++lo;
  const size_t hi = t.size() >= 2 ? t.size() - 2 : 0;
  if (lo > hi || count < 1)
    throw ConfigError("checkpoint window is empty; lower t_min or extend T");
  std::vector<size_t> out;
  const size_t span = hi - lo;
  const int n = std::min<int>(count, static_cast<int>(span) + 1);
  for (int i = 0; i < n; ++i)
    out.push_back(lo + span * static_cast<size_t>(i) / std::max(1, n - 1));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// fp-decay: exponential entropy decay rates, Fisher decay, and the convex
// Sobolev inequality H <= I / (2 lambda) along the whole trajectory.

bool run_fp_decay(Config& cfg, const std::string& dir) {
  TrajectorySetup s = read_trajectory_setup(cfg);
  const double fit_t0 = cfg.get_double("fit_t0");
  const double fit_t1 = cfg.get_double("fit_t1");
  if (!(0.0 <= fit_t0 && fit_t0 < fit_t1 && fit_t1 <= s.T))
    throw ConfigError("need 0 <= fit_t0 < fit_t1 <= T");
  const double rate_lo = cfg.get_double("rate_lo", 1.9);
  const double rate_hi = cfg.get_double("rate_hi", 2.1);
  const double fisher_rate_min = cfg.get_double("fisher_rate_min", 1.9);
  const double sobolev_slack = cfg.get_double("sobolev_slack", 1.02);
  const double mass_tol = cfg.get_double("mass_tol", 1e-8);
  cfg.finish();

  std::filesystem::create_directories(dir);
  VerdictTable v(dir);
  try {
    TrajectoryDiagnostics diag;
    evolve_setup(s, &diag);
    write_trajectory_csv(dir, diag);

    const double lambda = nibec_lambda(s.rm.model, s.grid).inf_lambda;
    v.note("nibec_lambda", lambda);
    if (!(lambda > 0.0)) throw NumericalError("certified rate is not positive");

    const DecayFit fk = decay_rate_fit(diag.t, diag.h_kl, fit_t0, fit_t1);
    const DecayFit fc = decay_rate_fit(diag.t, diag.h_chi2, fit_t0, fit_t1);
    const DecayFit gk = decay_rate_fit(diag.t, diag.i_kl, fit_t0, fit_t1);
    const DecayFit gc = decay_rate_fit(diag.t, diag.i_chi2, fit_t0, fit_t1);
    const std::string window =
        "in [" + fmt(rate_lo) + ", " + fmt(rate_hi) + "]";
    v.check("rate_H_kl", fk.rate, window, rate_lo <= fk.rate && fk.rate <= rate_hi);
    v.check("rate_H_chi2", fc.rate, window, rate_lo <= fc.rate && fc.rate <= rate_hi);
    v.check("rate_I_kl", gk.rate, ">= " + fmt(fisher_rate_min),
            gk.rate >= fisher_rate_min);
    v.check("rate_I_chi2", gc.rate, ">= " + fmt(fisher_rate_min),
            gc.rate >= fisher_rate_min);

    double worst_ratio = 0.0;
    for (size_t k = 0; k < diag.t.size(); ++k) {
      if (diag.h_kl[k] > 1e-12 && diag.i_kl[k] > 0.0)
        worst_ratio = std::max(worst_ratio, 2.0 * lambda * diag.h_kl[k] / diag.i_kl[k]);
      if (diag.h_chi2[k] > 1e-12 && diag.i_chi2[k] > 0.0)
        worst_ratio =
            std::max(worst_ratio, 2.0 * lambda * diag.h_chi2[k] / diag.i_chi2[k]);
    }
    v.check("sobolev_max_ratio", worst_ratio, "<= " + fmt(sobolev_slack),
            worst_ratio <= sobolev_slack);

    double worst_mass = 0.0;
    for (double md : diag.mass_defect) worst_mass = std::max(worst_mass, md);
    v.check("mass_defect_max", worst_mass, "<= " + fmt(mass_tol),
            worst_mass <= mass_tol);
  } catch (const std::exception& e) {
    v.fail_note("aborted", e.what());
    v.write();
    throw;
  }
  v.write();
  return v.all_passed();
}

// ---------------------------------------------------------------------------
// dissipation-identity: centered difference of H against -I at sampled times.

bool run_dissipation_identity(Config& cfg, const std::string& dir) {
  TrajectorySetup s = read_trajectory_setup(cfg);
  const int n_checkpoints = cfg.get_int("n_checkpoints", 10);
  const double t_min = cfg.get_double("t_min", 0.1 * s.T);
  const double tol = cfg.get_double("tol", 0.02);
  cfg.finish();

  std::filesystem::create_directories(dir);
  VerdictTable v(dir);
  try {
    TrajectoryDiagnostics diag;
    evolve_setup(s, &diag);
    write_trajectory_csv(dir, diag);

    const std::vector<size_t> ks = pick_checkpoints(diag.t, t_min, n_checkpoints);
    CsvWriter out(dir + "/dissipation.csv",
                  {"t", "dHdt_kl", "I_kl", "rel_err_kl", "dHdt_chi2", "I_chi2",
                   "rel_err_chi2"});
    double worst_kl = 0.0, worst_chi2 = 0.0;
    for (size_t k : ks) {
      const double span = diag.t[k + 1] - diag.t[k - 1];
      const double dk = (diag.h_kl[k + 1] - diag.h_kl[k - 1]) / span;
      const double dc = (diag.h_chi2[k + 1] - diag.h_chi2[k - 1]) / span;
      if (!(diag.i_kl[k] > 0.0) || !(diag.i_chi2[k] > 0.0))
        throw NumericalError("Fisher information vanished inside the check window");
      const double rk = std::abs(dk + diag.i_kl[k]) / diag.i_kl[k];
      const double rc = std::abs(dc + diag.i_chi2[k]) / diag.i_chi2[k];
      worst_kl = std::max(worst_kl, rk);
      worst_chi2 = std::max(worst_chi2, rc);
      out.row({fmt(diag.t[k]), fmt(dk), fmt(diag.i_kl[k]), fmt(rk), fmt(dc),
               fmt(diag.i_chi2[k]), fmt(rc)});
    }
    out.close();
    v.note("checkpoints", static_cast<double>(ks.size()));
    v.check("max_rel_err_kl", worst_kl, "<= " + fmt(tol), worst_kl <= tol);
    v.check("max_rel_err_chi2", worst_chi2, "<= " + fmt(tol), worst_chi2 <= tol);
  } catch (const std::exception& e) {
    v.fail_note("aborted", e.what());
    v.write();
    throw;
  }
  v.write();
  return v.all_passed();
}

// ---------------------------------------------------------------------------
// tv-dissipation: the signed decay form of total variation against the
// centered difference of TV(t), plus its sign.

bool run_tv_dissipation(Config& cfg, const std::string& dir) {
  TrajectorySetup s = read_trajectory_setup(cfg);
  const int n_checkpoints = cfg.get_int("n_checkpoints", 10);
  const double t_min = cfg.get_double("t_min", 0.1 * s.T);
  const double tol = cfg.get_double("tol", 0.05);
  cfg.finish();

  std::filesystem::create_directories(dir);
  VerdictTable v(dir);
  try {
    TrajectoryDiagnostics diag;
    const DensityTrajectory traj = evolve_setup(s, &diag);
    write_trajectory_csv(dir, diag);
    const GridDensity pinf = stationary_density(s.rm.model, s.grid);

    double max_rhs = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < traj.times.size(); ++k)
      max_rhs = std::max(
          max_rhs, tv_dissipation_rhs(traj.density_at(static_cast<int>(k)), pinf,
                                      s.rm.model)
                       .value);

    const std::vector<size_t> ks = pick_checkpoints(diag.t, t_min, n_checkpoints);
    CsvWriter out(dir + "/tv_dissipation.csv", {"t", "tv", "dtv_dt", "rhs", "rel_err"});
    double worst = 0.0;
    for (size_t k : ks) {
      const double span = diag.t[k + 1] - diag.t[k - 1];
      const double dtv = (diag.tv[k + 1] - diag.tv[k - 1]) / span;
      const double rhs =
          tv_dissipation_rhs(traj.density_at(static_cast<int>(k)), pinf, s.rm.model)
              .value;
      if (!(std::abs(rhs) > 0.0))
        throw NumericalError("TV dissipation vanished inside the check window");
      const double rel = std::abs(dtv - rhs) / std::abs(rhs);
      worst = std::max(worst, rel);
      out.row({fmt(diag.t[k]), fmt(diag.tv[k]), fmt(dtv), fmt(rhs), fmt(rel)});
    }
    out.close();
    v.check("max_rel_err", worst, "<= " + fmt(tol), worst <= tol);
    v.check("max_rhs", max_rhs, "<= 1e-12 (dissipative sign)", max_rhs <= 1e-12);
  } catch (const std::exception& e) {
    v.fail_note("aborted", e.what());
    v.write();
    throw;
  }
  v.write();
  return v.all_passed();
}

// ---------------------------------------------------------------------------
// mc-martingale: reversed-path density-ratio diagnostics against the grid
// entropies, a mis-specified-drift negative control, and (optionally) the
// exponential reconstruction with step refinement.

bool run_mc_martingale(Config& cfg, const std::string& dir) {
  ResolvedModel rm = resolve_model(cfg);
  const GridSpec grid = resolve_grid(cfg, rm.model);
  const double T = cfg.get_double("T");
  require_positive(T, "T");
  const double mc_dt = cfg.get_double("mc_dt");
  require_positive(mc_dt, "mc_dt");
  const int record_every = cfg.get_int("record_every", 1);
  if (record_every < 1) throw ConfigError("record_every must be >= 1");
  const int n_paths = cfg.get_int("n_paths");
  if (n_paths < 100) throw ConfigError("n_paths must be >= 100");
  const std::uint64_t seed = cfg.get_uint64("seed", 12345);
  const double fp_dt = cfg.get_double("fp_dt");
  require_positive(fp_dt, "fp_dt");
  const std::vector<double> init_mean = cfg.get_double_list("init_mean");
  const std::vector<double> init_sd = cfg.get_double_list("init_sd");

  // The density trajectory must hold a snapshot at every recorded path time.
  const double interval = mc_dt * record_every;
  const int fp_every = static_cast<int>(std::llround(interval / fp_dt));
  if (fp_every < 1 || std::abs(fp_every * fp_dt - interval) > 1e-9 * interval)
    throw ConfigError("fp_dt must divide mc_dt * record_every");

  const double drift_z_max = cfg.get_double("drift_z_max", 3.0);
  const double consistency_z_max = cfg.get_double("consistency_z_max", 3.0);
  // Each violation test is a 2-SE threshold per recorded step; with very many
  // steps a few statistical trips are expected, so the budget is a key.
  const int submartingale_max = cfg.get_int("submartingale_max", 0);
  const double clamped_max = cfg.get_double("clamped_max", 1e-3);
  const bool control = cfg.get_bool("control", true);
  const double control_shift = cfg.get_double("control_shift", 0.3);
  const double control_z_min = cfg.get_double("control_z_min", 4.0);
  const int control_paths = cfg.get_int("control_paths", std::min(n_paths, 20000));
  if (control && control_paths < 100) throw ConfigError("control_paths must be >= 100");

  const bool girsanov = cfg.get_bool("girsanov", false);
  double girsanov_dt_coarse = 0.0;
  double girsanov_median_max = 0.0;
  if (girsanov) {
    if (record_every != 1)
      throw ConfigError("girsanov mode needs record_every = 1");
    girsanov_dt_coarse = cfg.get_double("girsanov_dt_coarse");
    const double ratio = girsanov_dt_coarse / mc_dt;
    if (!(girsanov_dt_coarse > mc_dt) ||
        std::abs(ratio - std::llround(ratio)) > 1e-9)
      throw ConfigError("girsanov_dt_coarse must be an integer multiple of mc_dt");
    girsanov_median_max = cfg.get_double("girsanov_median_max", 0.05);
  }
  cfg.finish();

  std::filesystem::create_directories(dir);
  VerdictTable v(dir);
  try {
    const GridDensity pinf = stationary_density(rm.model, grid);
    const GridDensity p0 = gaussian_density(grid, init_mean, init_sd);
    const DensityTrajectory traj = evolve(rm.model, p0, T, fp_dt, fp_every);

    const PathEnsemble ens =
        simulate_reversed(rm.model, n_paths, T, mc_dt, seed, record_every);
    v.check("blown_up_paths", static_cast<double>(ens.blown_up_count), "== 0",
            ens.blown_up_count == 0);
    const RatioSeries series = density_ratio_process(ens, traj, pinf);

    const EntropyGenerator u_kl = builtin_entropy(EntropyKind::kl);
    const EntropyGenerator u_chi2 = builtin_entropy(EntropyKind::chi2);
    std::vector<double> h_kl, e_kl, h_chi2, e_chi2;
    for (double t : series.times) {
      const GridDensity pt = traj.density_at(traj.index_of_time(T - t));
      const ScalarResult a = evaluate_entropy(u_kl, pt, pinf);
      const ScalarResult b = evaluate_entropy(u_chi2, pt, pinf);
      h_kl.push_back(a.value);
      e_kl.push_back(a.error_estimate);
      h_chi2.push_back(b.value);
      e_chi2.push_back(b.error_estimate);
    }
    const MartingaleReport rep = martingale_diagnostics(series, u_kl, h_kl, e_kl);
    const MartingaleReport rep2 = martingale_diagnostics(series, u_chi2, h_chi2, e_chi2);

    CsvWriter out(dir + "/mc_summary.csv",
                  {"t", "mean_D", "se_D", "mean_UD", "se_UD", "max_drift_z",
                   "clamped_fraction"});
    for (size_t k = 0; k < rep.times.size(); ++k)
      out.row({fmt(rep.times[k]), fmt(rep.mean_d[k]), fmt(rep.se_d[k]),
               fmt(rep.mean_ud[k]), fmt(rep.se_ud[k]), fmt(rep.max_abs_drift_z),
               fmt(rep.clamped_fraction)});
    out.close();

    v.check("max_drift_z", rep.max_abs_drift_z, "< " + fmt(drift_z_max),
            rep.max_abs_drift_z < drift_z_max);
    v.check("consistency_z_kl", rep.max_consistency_z, "< " + fmt(consistency_z_max),
            rep.max_consistency_z < consistency_z_max);
    v.check("consistency_z_chi2", rep2.max_consistency_z,
            "< " + fmt(consistency_z_max),
            rep2.max_consistency_z < consistency_z_max);
    v.check("submartingale_violations_kl",
            static_cast<double>(rep.submartingale_violations),
            "<= " + std::to_string(submartingale_max),
            rep.submartingale_violations <= submartingale_max);
    v.check("submartingale_violations_chi2",
            static_cast<double>(rep2.submartingale_violations),
            "<= " + std::to_string(submartingale_max),
            rep2.submartingale_violations <= submartingale_max);
    v.check("clamped_fraction", rep.clamped_fraction, "< " + fmt(clamped_max),
            rep.clamped_fraction < clamped_max);
    v.note("increment_corr_z", rep.max_increment_corr_z);

    if (control) {
      const DiffusionModel& m = rm.model;
      const double shift = control_shift;
      const VecField wrong = [&m, shift](const Vec& y) {
        Vec b = reversed_drift(m, y);
        b[0] += shift;
        return b;
      };
      const PathEnsemble ens_c = simulate_reversed(rm.model, control_paths, T, mc_dt,
                                                   seed + 1, record_every, wrong);
      const RatioSeries series_c = density_ratio_process(ens_c, traj, pinf);
      const MartingaleReport rep_c = martingale_diagnostics(series_c, u_kl);
      v.check("control_drift_z", rep_c.max_abs_drift_z, "> " + fmt(control_z_min),
              rep_c.max_abs_drift_z > control_z_min);
    }

    if (girsanov) {
      const auto median_rel_dev = [&](const PathEnsemble& e) {
        const RatioSeries d = density_ratio_process(e, traj, pinf);
        const RatioSeries dh = exponential_girsanov_process(rm.model, e, traj, pinf);
        const int last = static_cast<int>(d.times.size()) - 1;
        std::vector<double> devs;
        for (int p = 0; p < d.n_paths; ++p) {
          if (d.hit_zero_index[static_cast<size_t>(p)] >= 0 ||
              dh.hit_zero_index[static_cast<size_t>(p)] >= 0)
            continue;
          devs.push_back(std::abs(dh.at(p, last) - d.at(p, last)) / d.at(p, last));
        }
        if (devs.size() < static_cast<size_t>(d.n_paths) / 2)
          throw NumericalError("too many absorbed paths for the reconstruction check");
        std::sort(devs.begin(), devs.end());
        return devs[devs.size() / 2];
      };
      const double med_fine = median_rel_dev(ens);
      const PathEnsemble ens_coarse =
          simulate_reversed(rm.model, n_paths, T, girsanov_dt_coarse, seed + 2, 1);
      const double med_coarse = median_rel_dev(ens_coarse);

      CsvWriter gout(dir + "/girsanov.csv", {"dt", "median_rel_dev"});
      gout.row({fmt(girsanov_dt_coarse), fmt(med_coarse)});
      gout.row({fmt(mc_dt), fmt(med_fine)});
      gout.close();

      v.check("girsanov_median_rel_dev", med_fine, "< " + fmt(girsanov_median_max),
              med_fine < girsanov_median_max);
      v.check("girsanov_refinement", med_coarse - med_fine,
              "> 0 (deviation shrinks with dt)", med_coarse > med_fine);
    }
  } catch (const std::exception& e) {
    v.fail_note("aborted", e.what());
    v.write();
    throw;
  }
  v.write();
  return v.all_passed();
}

// ---------------------------------------------------------------------------
// admissibility: the fourth-order derivative bound across the builtin
// entropy generators, including the convex-but-inadmissible quartic.

bool run_admissibility(Config& cfg, const std::string& dir) {
  const double power_beta = cfg.get_double("power_beta", 1.5);
  cfg.finish();

  std::filesystem::create_directories(dir);
  VerdictTable v(dir);
  try {
    struct Case {
      std::string label;
      EntropyKind kind;
      double param;
      bool expect_admissible;
    };
    const std::vector<Case> cases = {
        {"kl", EntropyKind::kl, 0.0, true},
        {"chi2", EntropyKind::chi2, 0.0, true},
        {"tv", EntropyKind::tv, 0.0, false},
        {"power", EntropyKind::power, power_beta, true},
        {"quartic", EntropyKind::quartic, 0.0, false},
    };
    CsvWriter out(dir + "/admissibility.csv",
                  {"entropy", "param", "normalized", "convex", "derivative_bound",
                   "admissible", "worst_margin", "worst_r"});
    for (const Case& c : cases) {
      const EntropyGenerator g = builtin_entropy(c.kind, c.param);
      const AdmissibilityReport rep = check_admissibility(g);
      out.row({c.label, fmt(c.param), rep.normalized ? "1" : "0",
               rep.convex ? "1" : "0", rep.derivative_bound ? "1" : "0",
               rep.admissible ? "1" : "0", fmt(rep.worst_margin), fmt(rep.worst_r)});
      v.check("admissible_" + c.label, rep.admissible ? 1.0 : 0.0,
              c.expect_admissible ? "== 1" : "== 0",
              rep.admissible == c.expect_admissible);
    }
    out.close();
  } catch (const std::exception& e) {
    v.fail_note("aborted", e.what());
    v.write();
    throw;
  }
  v.write();
  return v.all_passed();
}

bool run_catalog_experiment(Config& cfg, const std::string& dir) {
  cfg.finish();
  std::filesystem::create_directories(dir);
  VerdictTable v(dir);
  std::cout << catalog_listing();
  v.check("catalog_entries", static_cast<double>(catalog().size()), ">= 5",
          catalog().size() >= 5);
  v.write();
  return v.all_passed();
}

}  // namespace

std::string catalog_listing() {
  std::string out;
  for (const CatalogEntry& e : catalog()) {
    out += e.name + "\n  " + e.summary + "\n  parameters: " + e.parameter_doc + "\n";
  }
  return out;
}

RunOutcome run_experiment(Config& cfg) {
  const std::string kind = cfg.get_string("experiment");
  const std::string dir = cfg.get_string("output_dir");
  if (dir.empty()) throw ConfigError("output_dir must not be empty");

  bool passed = false;
  if (kind == "theta-scan")
    passed = run_theta_scan(cfg, dir);
  else if (kind == "gauge-optimize")
    passed = run_gauge_optimize(cfg, dir);
  else if (kind == "fp-decay")
    passed = run_fp_decay(cfg, dir);
  else if (kind == "dissipation-identity")
    passed = run_dissipation_identity(cfg, dir);
  else if (kind == "tv-dissipation")
    passed = run_tv_dissipation(cfg, dir);
  else if (kind == "mc-martingale")
    passed = run_mc_martingale(cfg, dir);
  else if (kind == "admissibility")
    passed = run_admissibility(cfg, dir);
  else if (kind == "catalog")
    passed = run_catalog_experiment(cfg, dir);
  else
    throw ConfigError("unknown experiment '" + kind + "'");

  return {passed, dir};
}

}  // namespace nibec
