#include "nibec/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nibec/errors.hpp"
#include "nibec/parallel.hpp"
#include "nibec/rng.hpp"

namespace nibec {

namespace {
constexpr std::uint64_t kForwardDomain = 0x464f5257ull;
constexpr std::uint64_t kReversedDomain = 0x52455653ull;
constexpr double kBlowupThreshold = 1e8;
constexpr std::size_t kPathChunk = 256;

long check_steps(double T, double dt, int record_every) {
  if (!(dt > 0)) throw std::invalid_argument("simulate: dt must be positive");
  if (T < 0) throw std::invalid_argument("simulate: negative horizon");
  const double steps_real = T / dt;
  const long steps = std::lround(steps_real);
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * std::max(1.0, steps_real))
    throw std::invalid_argument("simulate: T must be an integer multiple of dt");
  if (record_every < 1 || (steps > 0 && steps % record_every != 0))
    throw std::invalid_argument("simulate: record_every must divide the step count");
  return steps;
}

struct SimSpec {
  const DiffusionModel* model;
  VecField drift;  // may wrap reversed drift or an override
  std::function<Vec(RandomStream&)> initial;
  std::uint64_t domain;
};

PathEnsemble run_em(const SimSpec& sim, int n_paths, double T, double dt,
                    std::uint64_t seed, int record_every, bool reversed) {
  const long steps = check_steps(T, dt, record_every);
  const DiffusionModel& m = *sim.model;
  PathEnsemble e;
  e.model_name = m.name;
  e.dim = m.dim;
  e.n_paths = n_paths;
  e.n_times = static_cast<int>(steps / record_every) + 1;
  e.dt = dt * record_every;
  e.sim_dt = dt;
  e.seed = seed;
  e.reversed = reversed;
  e.times.resize(static_cast<size_t>(e.n_times));
  for (int k = 0; k < e.n_times; ++k) e.times[static_cast<size_t>(k)] = k * e.dt;
  e.states.assign(static_cast<size_t>(n_paths) * e.n_times * m.dim, 0.0);
  e.blown_up.assign(static_cast<size_t>(n_paths), 0);

  const double sqdt = std::sqrt(dt);
  std::vector<long> chunk_blowups((static_cast<size_t>(n_paths) + kPathChunk - 1) / kPathChunk, 0);

  parallel_chunks(static_cast<size_t>(n_paths), kPathChunk, [&](std::size_t pb, std::size_t pe) {
    long local_blow = 0;
    for (std::size_t path = pb; path < pe; ++path) {
      RandomStream rng(seed, path, sim.domain);
      Vec x = sim.initial(rng);
      bool frozen = false;
      const auto record = [&](int slot) {
        for (int c = 0; c < m.dim; ++c)
          e.states[(path * static_cast<size_t>(e.n_times) +
                    static_cast<size_t>(slot)) * static_cast<size_t>(m.dim) +
                   static_cast<size_t>(c)] = x[c];
      };
      record(0);
      for (long k = 1; k <= steps; ++k) {
        if (!frozen) {
          const Vec b = sim.drift(x);
          const Mat s = m.sigma(x);
          Vec xi(m.noise_dim);
          for (int c = 0; c < m.noise_dim; ++c) xi[c] = rng.normal();
          for (int c = 0; c < m.dim; ++c) {
            double dx = b[c] * dt;
            for (int r = 0; r < m.noise_dim; ++r) dx += s(c, r) * sqdt * xi[r];
            x[c] += dx;
          }
          for (int c = 0; c < m.dim; ++c)
            if (!std::isfinite(x[c]) || std::abs(x[c]) > kBlowupThreshold) {
              frozen = true;
              e.blown_up[path] = 1;
              ++local_blow;
              break;
            }
        }
        if (k % record_every == 0) record(static_cast<int>(k / record_every));
      }
    }
    chunk_blowups[pb / kPathChunk] = local_blow;
  });
  for (long c : chunk_blowups) e.blown_up_count += c;
  return e;
}

}  // namespace

InitialCondition InitialCondition::at_point(const Vec& x) {
  InitialCondition ic;
  ic.kind = Kind::point;
  ic.point = x;
  return ic;
}

InitialCondition InitialCondition::gaussian(const Vec& mean, const Vec& std_dev) {
  InitialCondition ic;
  ic.kind = Kind::gaussian;
  ic.mean = mean;
  ic.std_dev = std_dev;
  return ic;
}

InitialCondition InitialCondition::stationary() {
  InitialCondition ic;
  ic.kind = Kind::stationary;
  return ic;
}

namespace {

std::function<Vec(RandomStream&)> stationary_sampler(const DiffusionModel& m) {
  if (m.sample_pinf) return m.sample_pinf;
  // Rejection sampling from the uniform law on the recommended box.
  const GridSpec box = m.recommended_grid;
  double lp_max = -std::numeric_limits<double>::infinity();
  const int scan = 129;
  const int n1 = box.dim == 2 ? scan : 1;
  for (int i = 0; i < scan; ++i)
    for (int j = 0; j < n1; ++j) {
      Vec x(box.dim);
      x[0] = box.lo[0] + (box.hi[0] - box.lo[0]) * i / (scan - 1);
      if (box.dim == 2) x[1] = box.lo[1] + (box.hi[1] - box.lo[1]) * j / (n1 - 1);
      lp_max = std::max(lp_max, m.log_pinf(x));
    }
  lp_max += 0.5;  // headroom: the scan may miss the exact mode
  const int dim = m.dim;
  auto log_pinf = m.log_pinf;
  return [box, lp_max, dim, log_pinf](RandomStream& rng) {
    for (int tries = 0; tries < 100000; ++tries) {
      Vec x(dim);
      for (int c = 0; c < dim; ++c) x[c] = rng.uniform_in(box.lo[c], box.hi[c]);
      if (std::log(rng.uniform()) <= log_pinf(x) - lp_max) return x;
    }
    throw NumericalError("stationary sampler: rejection loop failed to accept");
  };
}

}  // namespace

PathEnsemble simulate_forward(const DiffusionModel& model,
                              const InitialCondition& init, int n_paths,
                              double T, double dt, std::uint64_t seed,
                              int record_every) {
  SimSpec sim;
  sim.model = &model;
  sim.drift = model.drift;
  sim.domain = kForwardDomain;
  switch (init.kind) {
    case InitialCondition::Kind::point:
      sim.initial = [p = init.point](RandomStream&) { return p; };
      break;
    case InitialCondition::Kind::gaussian:
      sim.initial = [mu = init.mean, sd = init.std_dev](RandomStream& rng) {
        Vec x = mu;
        for (int c = 0; c < x.n; ++c) x[c] += sd[c] * rng.normal();
        return x;
      };
      break;
    case InitialCondition::Kind::stationary:
      sim.initial = stationary_sampler(model);
      break;
  }
  return run_em(sim, n_paths, T, dt, seed, record_every, false);
}

PathEnsemble simulate_reversed(const DiffusionModel& model, int n_paths,
                               double T, double dt, std::uint64_t seed,
                               int record_every, const VecField& drift_override) {
  SimSpec sim;
  sim.model = &model;
  if (drift_override) {
    sim.drift = drift_override;
  } else {
    const DiffusionModel m = model;
    sim.drift = [m](const Vec& x) { return reversed_drift(m, x); };
  }
  sim.domain = kReversedDomain;
  sim.initial = stationary_sampler(model);
  return run_em(sim, n_paths, T, dt, seed, record_every, true);
}

namespace {

bool inside_box(const GridSpec& s, const Vec& x) {
  for (int a = 0; a < s.dim; ++a)
    if (x[a] < s.lo[a] || x[a] > s.hi[a]) return false;
  return true;
}

}  // namespace

RatioSeries density_ratio_process(const PathEnsemble& ensemble,
                                  const DensityTrajectory& traj,
                                  const GridDensity& pinf, double d_floor) {
  if (!traj.grid.same_as(pinf.spec))
    throw std::invalid_argument("density_ratio_process: trajectory/pinf grid mismatch");
  const double T = traj.times.back();
  const int K = ensemble.n_times;
  std::vector<GridDensity> slices(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k)
    slices[static_cast<size_t>(k)] =
        traj.density_at(traj.index_of_time(T - ensemble.times[static_cast<size_t>(k)]));

  RatioSeries rs;
  rs.source = "density_ratio";
  rs.times = ensemble.times;
  rs.n_paths = ensemble.n_paths;
  rs.values.assign(static_cast<size_t>(ensemble.n_paths) * K, 0.0);
  rs.hit_zero_index.assign(static_cast<size_t>(ensemble.n_paths), -1);
  std::vector<long> clamp_chunks(
      (static_cast<size_t>(ensemble.n_paths) + kPathChunk - 1) / kPathChunk, 0);

  parallel_chunks(static_cast<size_t>(ensemble.n_paths), kPathChunk,
                  [&](std::size_t pb, std::size_t pe) {
    long clamps = 0;
    for (std::size_t path = pb; path < pe; ++path) {
      bool absorbed = false;
      for (int k = 0; k < K; ++k) {
        const size_t slot = path * static_cast<size_t>(K) + static_cast<size_t>(k);
        if (absorbed) {
          rs.values[slot] = 0.0;
          continue;
        }
        const Vec y = ensemble.state(static_cast<int>(path), k);
        if (!inside_box(traj.grid, y)) ++clamps;
        const double num = interpolate(slices[static_cast<size_t>(k)], y);
        const double den = interpolate(pinf, y);
        double d = den > 0 ? num / den : 0.0;
        if (d <= d_floor) {
          d = 0.0;
          absorbed = true;
          rs.hit_zero_index[path] = k;
        }
        rs.values[slot] = d;
      }
    }
    clamp_chunks[pb / kPathChunk] = clamps;
  });
  long total_clamps = 0;
  for (long c : clamp_chunks) total_clamps += c;
  rs.clamped_fraction = static_cast<double>(total_clamps) /
                        (static_cast<double>(ensemble.n_paths) * K);
  return rs;
}

RatioSeries exponential_girsanov_process(const DiffusionModel& model,
                                         const PathEnsemble& ensemble,
                                         const DensityTrajectory& traj,
                                         const GridDensity& pinf, double d_floor) {
  if (ensemble.dt != ensemble.sim_dt)
    throw std::invalid_argument(
        "exponential_girsanov_process: ensemble must be recorded every step");
  if (!traj.grid.same_as(pinf.spec))
    throw std::invalid_argument("exponential_girsanov_process: grid mismatch");
  const double T = traj.times.back();
  const int K = ensemble.n_times;
  const GridSpec& spec = traj.grid;
  const int count = spec.node_count();

  // Nodal grad log(p_s / pinf) for each needed forward slice.
  std::vector<GridDensity> slices(static_cast<size_t>(K));
  std::vector<std::vector<double>> grads(static_cast<size_t>(K));
  std::vector<double> log_ratio(static_cast<size_t>(count));
  for (int k = 0; k < K; ++k) {
    slices[static_cast<size_t>(k)] =
        traj.density_at(traj.index_of_time(T - ensemble.times[static_cast<size_t>(k)]));
    const auto& pv = slices[static_cast<size_t>(k)].values;
    for (int idx = 0; idx < count; ++idx)
      log_ratio[static_cast<size_t>(idx)] =
          std::log(std::max(pv[static_cast<size_t>(idx)], 1e-300)) -
          std::log(std::max(pinf.values[static_cast<size_t>(idx)], 1e-300));
    grads[static_cast<size_t>(k)] = nodal_gradient(spec, log_ratio);
  }
  // Split the strided gradient arrays into per-coordinate grids once so the
  // multilinear interpolation helper can be reused inside the path loop.
  std::vector<std::vector<GridDensity>> grad_fields(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    grad_fields[static_cast<size_t>(k)].resize(static_cast<size_t>(spec.dim));
    for (int c = 0; c < spec.dim; ++c) {
      GridDensity g;
      g.spec = spec;
      g.values.resize(static_cast<size_t>(count));
      for (int idx = 0; idx < count; ++idx)
        g.values[static_cast<size_t>(idx)] =
            grads[static_cast<size_t>(k)][static_cast<size_t>(idx * spec.dim + c)];
      grad_fields[static_cast<size_t>(k)][static_cast<size_t>(c)] = std::move(g);
    }
  }

  RatioSeries rs;
  rs.source = "girsanov";
  rs.times = ensemble.times;
  rs.n_paths = ensemble.n_paths;
  rs.values.assign(static_cast<size_t>(ensemble.n_paths) * K, 0.0);
  rs.hit_zero_index.assign(static_cast<size_t>(ensemble.n_paths), -1);
  std::vector<long> clamp_chunks(
      (static_cast<size_t>(ensemble.n_paths) + kPathChunk - 1) / kPathChunk, 0);
  const double dt = ensemble.sim_dt;

  parallel_chunks(static_cast<size_t>(ensemble.n_paths), kPathChunk,
                  [&](std::size_t pb, std::size_t pe) {
    long clamps = 0;
    for (std::size_t path = pb; path < pe; ++path) {
      const Vec y0 = ensemble.state(static_cast<int>(path), 0);
      if (!inside_box(spec, y0)) ++clamps;
      const double den0 = interpolate(pinf, y0);
      double d0 = den0 > 0 ? interpolate(slices[0], y0) / den0 : 0.0;
      double log_acc = 0.0;
      bool absorbed = d0 <= d_floor;
      rs.values[path * static_cast<size_t>(K)] = absorbed ? 0.0 : d0;
      if (absorbed) rs.hit_zero_index[path] = 0;
      for (int k = 0; k + 1 < K; ++k) {
        const size_t slot = path * static_cast<size_t>(K) + static_cast<size_t>(k + 1);
        if (absorbed) {
          rs.values[slot] = 0.0;
          continue;
        }
        const Vec y = ensemble.state(static_cast<int>(path), k);
        const Vec ynext = ensemble.state(static_cast<int>(path), k + 1);
        if (!inside_box(spec, y)) ++clamps;
        Vec g(spec.dim);
        for (int c = 0; c < spec.dim; ++c)
          g[c] = interpolate(grad_fields[static_cast<size_t>(k)][static_cast<size_t>(c)], y);
        const Vec bbar = reversed_drift(model, y);
        const Mat a = model.diffusion_matrix(y);
        double incr = 0.0;
        for (int c = 0; c < spec.dim; ++c)
          incr += g[c] * (ynext[c] - y[c] - bbar[c] * dt);
        double quad = 0.0;
        for (int c = 0; c < spec.dim; ++c)
          for (int c2 = 0; c2 < spec.dim; ++c2) quad += g[c] * a(c, c2) * g[c2];
        log_acc += incr - 0.5 * quad * dt;
        const double d = d0 * std::exp(log_acc);
        if (!(d > d_floor)) {
          absorbed = true;
          rs.hit_zero_index[path] = k + 1;
          rs.values[slot] = 0.0;
        } else {
          rs.values[slot] = d;
        }
      }
    }
    clamp_chunks[pb / kPathChunk] = clamps;
  });
  long total_clamps = 0;
  for (long c : clamp_chunks) total_clamps += c;
  rs.clamped_fraction = static_cast<double>(total_clamps) /
                        (static_cast<double>(ensemble.n_paths) * K);
  return rs;
}

MartingaleReport martingale_diagnostics(const RatioSeries& series,
                                        const EntropyGenerator& u,
                                        const std::vector<double>& grid_h,
                                        const std::vector<double>& grid_h_err) {
  const int K = static_cast<int>(series.times.size());
  const int n = series.n_paths;
  if (n < 100) throw std::invalid_argument("martingale_diagnostics: need >= 100 paths");
  MartingaleReport rep;
  rep.times = series.times;
  rep.clamped_fraction = series.clamped_fraction;
  const double rn = static_cast<double>(n);

  std::vector<double> prev_ud;
  std::vector<double> cur_ud(static_cast<size_t>(n));
  for (int k = 0; k < K; ++k) {
    double s = 0, s2 = 0, su = 0, su2 = 0;
    for (int p = 0; p < n; ++p) {
      const double d = series.at(p, k);
      const double ud = u.u(d > 0 ? d : 0.0);
      s += d;
      s2 += d * d;
      su += ud;
      su2 += ud * ud;
      cur_ud[static_cast<size_t>(p)] = ud;
    }
    const double mean = s / rn;
    const double var = std::max(0.0, (s2 - rn * mean * mean) / (rn - 1));
    const double se = std::sqrt(var / rn);
    const double mu = su / rn;
    const double varu = std::max(0.0, (su2 - rn * mu * mu) / (rn - 1));
    const double seu = std::sqrt(varu / rn);
    rep.mean_d.push_back(mean);
    rep.se_d.push_back(se);
    rep.mean_ud.push_back(mu);
    rep.se_ud.push_back(seu);
    double z = 0.0;
    if (se > 0) z = (mean - 1.0) / se;
    else if (mean != 1.0) z = std::numeric_limits<double>::infinity();
    rep.drift_z.push_back(z);
    rep.max_abs_drift_z = std::max(rep.max_abs_drift_z, std::abs(z));

    if (k > 0) {
      // Submartingale check with the paired standard error of the increment.
      double sd = 0, sd2 = 0;
      for (int p = 0; p < n; ++p) {
        const double diff = cur_ud[static_cast<size_t>(p)] - prev_ud[static_cast<size_t>(p)];
        sd += diff;
        sd2 += diff * diff;
      }
      const double md = sd / rn;
      const double vard = std::max(0.0, (sd2 - rn * md * md) / (rn - 1));
      const double sed = std::sqrt(vard / rn);
      if (md < -2.0 * sed) ++rep.submartingale_violations;
    }
    std::swap(prev_ud, cur_ud);
    if (cur_ud.size() != static_cast<size_t>(n)) cur_ud.assign(static_cast<size_t>(n), 0.0);

    if (!grid_h.empty()) {
      const double target = grid_h[static_cast<size_t>(k)];
      const double err = grid_h_err.empty() ? 0.0 : grid_h_err[static_cast<size_t>(k)];
      const double denom = std::sqrt(seu * seu + err * err);
      const double cz = denom > 0 ? std::abs(mu - target) / denom
                                  : (mu == target ? 0.0 : std::numeric_limits<double>::infinity());
      rep.max_consistency_z = std::max(rep.max_consistency_z, cz);
    }
  }

  // Lag-1 correlation between the martingale increment and the current level.
  for (int k = 0; k + 1 < K; ++k) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int p = 0; p < n; ++p) {
      const double x = series.at(p, k);
      const double y = series.at(p, k + 1) - x;
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
    }
    const double cov = sxy - sx * sy / rn;
    const double vx = sxx - sx * sx / rn;
    const double vy = syy - sy * sy / rn;
    if (vx > 0 && vy > 0) {
      const double corr = cov / std::sqrt(vx * vy);
      rep.max_increment_corr_z =
          std::max(rep.max_increment_corr_z, std::abs(corr) * std::sqrt(rn));
    }
  }
  return rep;
}

double ks_pvalue(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.size() < 8) throw std::invalid_argument("ks_pvalue: sample too small");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double dmax = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    dmax = std::max(dmax, std::abs(f - static_cast<double>(i + 1) / n));
    dmax = std::max(dmax, std::abs(f - static_cast<double>(i) / n));
  }
  const double t = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * dmax;
  double p = 0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace nibec
