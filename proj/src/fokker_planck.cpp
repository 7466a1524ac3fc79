#include "nibec/fokker_planck.hpp"

#include <algorithm>
#include <cmath>

#include "nibec/errors.hpp"

namespace nibec {

namespace {
// Bernoulli function z / (e^z - 1), the exponential-fitting weight.
double bernoulli_b(double z) {
  if (std::abs(z) < 1e-5) return 1.0 - 0.5 * z + z * z / 12.0;
  return z / std::expm1(z);
}
}  // namespace

FokkerPlanckSolver::FokkerPlanckSolver(const DiffusionModel& model,
                                       const GridSpec& grid, double dt)
    : grid_(grid), dt_(dt), dim_(grid.dim) {
  if (grid.dim != model.dim)
    throw std::invalid_argument("FokkerPlanckSolver: grid/model dim mismatch");
  if (grid.dim > 2)
    throw std::invalid_argument("FokkerPlanckSolver: only 1-D and 2-D grids");
  if (!(dt > 0)) throw std::invalid_argument("FokkerPlanckSolver: dt must be positive");

  const int n0 = grid.n[0], n1 = grid.dim == 2 ? grid.n[1] : 1;
  diag_.assign(static_cast<size_t>(grid.node_count()), 1.0);
  scratch_.assign(static_cast<size_t>(grid.node_count()), 0.0);

  double amax[2] = {0.0, 0.0};
  double umax[2] = {0.0, 0.0};

  const auto add_face = [&](int i, int j, int axis) {
    const int left = grid.index(i, j);
    const int right = axis == 0 ? grid.index(i + 1, j) : grid.index(i, j + 1);
    const double h = grid.dx(axis);
    Vec xl = grid.node(i, j);
    Vec xr = xl;
    xr[axis] += h;
    Vec xm = xl;
    xm[axis] += 0.5 * h;
    const DerivativeBundle d = diffusion_derivatives(model, xm);
    const double diff = 0.5 * d.a(axis, axis);
    if (!(diff > 0))
      throw std::invalid_argument(
          "FokkerPlanckSolver: diffusion matrix must have positive diagonal");
    double u = d.b[axis];
    for (int j2 = 0; j2 < dim_; ++j2) u -= 0.5 * d.da(j2, axis, j2);
    amax[axis] = std::max(amax[axis], d.a(axis, axis));
    umax[axis] = std::max(umax[axis], std::abs(u));

    const double theta = model.log_pinf(xr) - model.log_pinf(xl);
    const double resid = u - diff * theta / h;  // non-reversible remainder
    Face f;
    f.left = left;
    f.right = right;
    f.axis = axis;
    f.gain_left = (dt / h) * ((diff / h) * bernoulli_b(theta) + std::max(-resid, 0.0));
    f.gain_right = (dt / h) * ((diff / h) * bernoulli_b(-theta) + std::max(resid, 0.0));
    faces_.push_back(f);
    diag_[static_cast<size_t>(left)] -= f.gain_right;
    diag_[static_cast<size_t>(right)] -= f.gain_left;

    // Cross-diffusion couplings for non-diagonal a.
    for (int beta = 0; beta < dim_; ++beta) {
      if (beta == axis || d.a(axis, beta) == 0.0) continue;
      has_cross_ = true;
      cross_.push_back({left, right, axis, 0.5 * d.a(axis, beta)});
    }
  };

  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      if (i + 1 < n0) add_face(i, j, 0);
      if (grid.dim == 2 && j + 1 < n1) add_face(i, j, 1);
    }

  stability_limit_ = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < dim_; ++axis) {
    const double h = grid.dx(axis);
    if (amax[axis] > 0)
      stability_limit_ = std::min(stability_limit_, h * h / amax[axis]);
    if (umax[axis] > 0)
      stability_limit_ = std::min(stability_limit_, h / umax[axis]);
  }
  stability_limit_ *= 0.4;
  if (dt > stability_limit_)
    throw std::invalid_argument("FokkerPlanckSolver: dt=" + std::to_string(dt) +
                                " exceeds stability limit " +
                                std::to_string(stability_limit_));
  const double worst = *std::min_element(diag_.begin(), diag_.end());
  if (worst < 0)
    throw NumericalError("FokkerPlanckSolver: update matrix lost positivity (diag " +
                         std::to_string(worst) + ")");
}

void FokkerPlanckSolver::step(GridDensity& p) const {
  if (!p.spec.same_as(grid_))
    throw std::invalid_argument("FokkerPlanckSolver::step: density on wrong grid");
  std::vector<double>& out = scratch_;
  const std::vector<double>& v = p.values;
  const size_t count = v.size();
  for (size_t i = 0; i < count; ++i) out[i] = diag_[i] * v[i];
  for (const Face& f : faces_) {
    out[static_cast<size_t>(f.left)] += f.gain_left * v[static_cast<size_t>(f.right)];
    out[static_cast<size_t>(f.right)] += f.gain_right * v[static_cast<size_t>(f.left)];
  }
  if (has_cross_) {
    // Transverse-gradient fluxes, scattered conservatively.
    const std::vector<double> grad = nodal_gradient(grid_, v);
    for (const CrossFace& c : cross_) {
      const int beta = 1 - c.axis;  // 2-D only
      const double gface =
          0.5 * (grad[static_cast<size_t>(c.left * dim_ + beta)] +
                 grad[static_cast<size_t>(c.right * dim_ + beta)]);
      const double flux = c.coeff * gface;
      const double h = grid_.dx(c.axis);
      out[static_cast<size_t>(c.left)] += dt_ / h * flux;
      out[static_cast<size_t>(c.right)] -= dt_ / h * flux;
    }
  }
  p.values.swap(out);
  for (double x : p.values)
    if (!std::isfinite(x)) throw NumericalError("FokkerPlanckSolver: non-finite density");
}

GridDensity DensityTrajectory::density_at(int k) const {
  GridDensity g;
  g.spec = grid;
  g.values = snapshots[static_cast<size_t>(k)];
  return g;
}

int DensityTrajectory::index_of_time(double t) const {
  for (size_t k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - t) < 1e-9) return static_cast<int>(k);
  throw std::invalid_argument("DensityTrajectory: no snapshot at t=" + std::to_string(t));
}

DensityTrajectory evolve(const DiffusionModel& model, const GridDensity& p0,
                         double T, double dt, int snapshot_every) {
  if (snapshot_every < 1) throw std::invalid_argument("evolve: snapshot_every < 1");
  if (T < 0) throw std::invalid_argument("evolve: negative horizon");
  const double steps_real = T / dt;
  const long steps = std::lround(steps_real);
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * std::max(1.0, steps_real))
    throw std::invalid_argument("evolve: T must be an integer multiple of dt");

  DensityTrajectory traj;
  traj.grid = p0.spec;
  traj.dt = dt;
  traj.snapshot_every = snapshot_every;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(p0.values);
  if (steps == 0) return traj;

  const FokkerPlanckSolver solver(model, p0.spec, dt);
  GridDensity p = p0;
  for (long k = 1; k <= steps; ++k) {
    solver.step(p);
    if (k % snapshot_every == 0 || k == steps) {
      traj.times.push_back(static_cast<double>(k) * dt);
      traj.snapshots.push_back(p.values);
    }
  }
  return traj;
}

DecayFit decay_rate_fit(const std::vector<double>& times,
                        const std::vector<double>& values, double t0, double t1) {
  if (times.size() != values.size())
    throw std::invalid_argument("decay_rate_fit: length mismatch");
  std::vector<double> ts, ls;
  for (size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t0 - 1e-12 || times[k] > t1 + 1e-12) continue;
    if (!(values[k] > 0) || !std::isfinite(values[k])) continue;
    ts.push_back(times[k]);
    ls.push_back(std::log(values[k]));
  }
  if (ts.size() < 4)
    throw std::invalid_argument("decay_rate_fit: fewer than 4 usable samples in window");
  const double n = static_cast<double>(ts.size());
  double st = 0, sl = 0, stt = 0, stl = 0, sll = 0;
  for (size_t k = 0; k < ts.size(); ++k) {
    st += ts[k];
    sl += ls[k];
    stt += ts[k] * ts[k];
    stl += ts[k] * ls[k];
    sll += ls[k] * ls[k];
  }
  const double denom = n * stt - st * st;
  if (denom <= 0) throw std::invalid_argument("decay_rate_fit: degenerate time window");
  const double slope = (n * stl - st * sl) / denom;
  DecayFit fit;
  fit.rate = -slope;
  fit.intercept = (sl - slope * st) / n;
  fit.points = static_cast<int>(ts.size());
  const double ss_tot = sll - sl * sl / n;
  double ss_res = 0;
  for (size_t k = 0; k < ts.size(); ++k) {
    const double pred = fit.intercept + slope * ts[k];
    ss_res += (ls[k] - pred) * (ls[k] - pred);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

TrajectoryDiagnostics trajectory_diagnostics(const DiffusionModel& model,
                                             const DensityTrajectory& traj) {
  const GridDensity pinf = project_density(
      traj.grid, [&](const Vec& x) { return std::exp(model.log_pinf(x)); });
  const EntropyGenerator kl = builtin_entropy(EntropyKind::kl);
  const EntropyGenerator chi2 = builtin_entropy(EntropyKind::chi2);
  TrajectoryDiagnostics d;
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const GridDensity p = traj.density_at(static_cast<int>(k));
    d.t.push_back(traj.times[k]);
    d.h_kl.push_back(evaluate_entropy(kl, p, pinf).value);
    d.h_chi2.push_back(evaluate_entropy(chi2, p, pinf).value);
    d.i_kl.push_back(evaluate_fisher(kl, p, pinf, model).value);
    d.i_chi2.push_back(evaluate_fisher(chi2, p, pinf, model).value);
    d.tv.push_back(total_variation(p, pinf).value);
    d.mass_defect.push_back(std::abs(p.mass() - 1.0));
  }
  return d;
}

}  // namespace nibec
