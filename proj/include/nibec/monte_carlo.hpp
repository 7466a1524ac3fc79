#pragma once
// Euler-Maruyama path ensembles for the forward and time-reversed dynamics,
// the pathwise density-ratio process read off a Fokker-Planck trajectory,
// its Girsanov exponential reconstruction, and martingale diagnostics.
// Randomness is counter-based per (seed, path), so ensembles are bit-for-bit
// reproducible for a given seed regardless of threading.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nibec/fokker_planck.hpp"
#include "nibec/model.hpp"

namespace nibec {

struct InitialCondition {
  enum class Kind { point, gaussian, stationary } kind = Kind::point;
  Vec point;      // point start
  Vec mean;       // gaussian
  Vec std_dev;    // gaussian, per-coordinate (diagonal covariance)

  static InitialCondition at_point(const Vec& x);
  static InitialCondition gaussian(const Vec& mean, const Vec& std_dev);
  static InitialCondition stationary();
};

struct PathEnsemble {
  std::string model_name;
  int dim = 0;
  int n_paths = 0;
  int n_times = 0;          // recorded states per path
  double dt = 0.0;          // recording interval (= sim dt * record_every)
  double sim_dt = 0.0;      // integrator step
  std::uint64_t seed = 0;
  bool reversed = false;
  std::vector<double> times;
  std::vector<double> states;  // [path][time][coord]
  std::vector<std::uint8_t> blown_up;
  long blown_up_count = 0;

  Vec state(int path, int k) const {
    Vec x(dim);
    for (int c = 0; c < dim; ++c)
      x[c] = states[(static_cast<size_t>(path) * n_times + k) * dim + c];
    return x;
  }
};

// Forward dynamics dX = b dt + sigma dW from the given initial law.
PathEnsemble simulate_forward(const DiffusionModel& model,
                              const InitialCondition& init, int n_paths,
                              double T, double dt, std::uint64_t seed,
                              int record_every = 1);

// Reversed dynamics dY = bbar dt + sigma dW started from the stationary law
// (exact sampler when the model provides one, rejection sampling over the
// recommended box otherwise).  `drift_override` replaces bbar, which is how
// the deliberately mis-specified negative control is produced.
PathEnsemble simulate_reversed(const DiffusionModel& model, int n_paths,
                               double T, double dt, std::uint64_t seed,
                               int record_every = 1,
                               const VecField& drift_override = nullptr);

struct RatioSeries {
  std::string source;  // "density_ratio" or "girsanov"
  std::vector<double> times;          // reversed-time grid
  int n_paths = 0;
  std::vector<double> values;         // [path][time]
  std::vector<int> hit_zero_index;    // -1 when never absorbed
  double clamped_fraction = 0.0;      // fraction of lookups outside the box

  double at(int path, int k) const {
    return values[static_cast<size_t>(path) * times.size() + static_cast<size_t>(k)];
  }
};

// D_k = p_{T - t_k}(Y_k) / pinf(Y_k) by multilinear interpolation; absorbed
// (frozen at 0) once the value drops below d_floor.  The trajectory must
// contain a snapshot at every forward time T - t_k, with T the final
// trajectory time.
RatioSeries density_ratio_process(const PathEnsemble& ensemble,
                                  const DensityTrajectory& traj,
                                  const GridDensity& pinf,
                                  double d_floor = 1e-12);

// Girsanov reconstruction: D_hat_t = D_0 * exp( sum g.dM - (1/2) sum g^T a g dt )
// with g = grad log(p_{T-s}/pinf) interpolated from the trajectory and
// dM_k = Y_{k+1} - Y_k - bbar(Y_k) dt.  Requires the ensemble to be recorded
// at every integrator step.
RatioSeries exponential_girsanov_process(const DiffusionModel& model,
                                         const PathEnsemble& ensemble,
                                         const DensityTrajectory& traj,
                                         const GridDensity& pinf,
                                         double d_floor = 1e-12);

struct MartingaleReport {
  std::vector<double> times;
  std::vector<double> mean_d, se_d, drift_z;
  std::vector<double> mean_ud, se_ud;
  double max_abs_drift_z = 0.0;
  double max_increment_corr_z = 0.0;  // lag-1 corr of increments vs level
  int submartingale_violations = 0;   // mean U(D) decreasing beyond 2 paired SE
  // Against grid entropy targets (empty if not supplied): max combined z.
  double max_consistency_z = 0.0;
  double clamped_fraction = 0.0;
};

// `grid_h` / `grid_h_err` optionally give, per time index, the grid entropy
// value and its quadrature error estimate for the consistency check.
MartingaleReport martingale_diagnostics(const RatioSeries& series,
                                        const EntropyGenerator& u,
                                        const std::vector<double>& grid_h = {},
                                        const std::vector<double>& grid_h_err = {});

// One-sample Kolmogorov-Smirnov p-value of xs against a continuous CDF.
double ks_pvalue(std::vector<double> xs, const std::function<double(double)>& cdf);

}  // namespace nibec
