#pragma once
// Explicit conservative finite-volume solver for the forward equation
//   dp/dt = sum_i d_i [ (1/2) sum_j d_j(a_ij p) - b_i p ]
// on a 1-D or 2-D box with zero-flux boundaries.  Along-axis transport uses
// exponential fitting against the model's exact stationary log-density, so a
// model with zero stationary flux has its projected stationary density as a
// fixed point of the scheme (up to roundoff); positivity and exact mass
// conservation hold by the gather-form update.

#include <vector>

#include "nibec/entropy.hpp"
#include "nibec/functionals.hpp"
#include "nibec/grid.hpp"
#include "nibec/model.hpp"

namespace nibec {

class FokkerPlanckSolver {
 public:
  // Throws std::invalid_argument if dt violates the stability bound
  //   dt <= 0.4 * min_axis( dx^2 / max a_ii , dx / max |u_i| ),
  // u_i = b_i - (1/2) sum_j d_j a_ij, or if a_ii is not positive on faces.
  FokkerPlanckSolver(const DiffusionModel& model, const GridSpec& grid, double dt);

  void step(GridDensity& p) const;

  double dt() const { return dt_; }
  double stability_limit() const { return stability_limit_; }
  const GridSpec& grid() const { return grid_; }

 private:
  struct Face {
    int left, right;  // flat node indices
    int axis;
    double gain_left;   // transfer coefficient from right node into left
    double gain_right;  // transfer coefficient from left node into right
  };
  GridSpec grid_;
  double dt_;
  double stability_limit_;
  std::vector<Face> faces_;
  std::vector<double> diag_;  // 1 - total outflow per node
  bool has_cross_ = false;
  // Cross-diffusion data (only when a has off-diagonal entries): per face,
  // coefficient of the averaged transverse gradient.
  struct CrossFace {
    int left, right;
    int axis;
    double coeff;  // (1/2) a_{axis,beta}(face) for the transverse beta
  };
  std::vector<CrossFace> cross_;
  mutable std::vector<double> scratch_;
  int dim_;
};

struct DensityTrajectory {
  GridSpec grid;
  double dt = 0.0;           // solver step
  int snapshot_every = 1;
  std::vector<double> times;
  std::vector<std::vector<double>> snapshots;  // nodal values per time

  GridDensity density_at(int k) const;
  // Index of the snapshot with time t (tolerance 1e-9); throws if absent.
  int index_of_time(double t) const;
};

// Runs n = T/dt steps (T must be an integer multiple of dt within 1e-9),
// recording the initial state, every `snapshot_every`-th step and the final
// one.  Throws NumericalError on NaN.
DensityTrajectory evolve(const DiffusionModel& model, const GridDensity& p0,
                         double T, double dt, int snapshot_every);

struct DecayFit {
  double rate = 0.0;      // decay exponent: fitted slope of -log H
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

// Least-squares fit of log(values) over times within [t0, t1]; requires at
// least 4 usable (strictly positive, finite) samples.
DecayFit decay_rate_fit(const std::vector<double>& times,
                        const std::vector<double>& values, double t0, double t1);

struct TrajectoryDiagnostics {
  std::vector<double> t;
  std::vector<double> h_kl, h_chi2, i_kl, i_chi2, tv, mass_defect;
};

// Entropy/information/total-variation readouts of a trajectory against the
// model's projected stationary density.
TrajectoryDiagnostics trajectory_diagnostics(const DiffusionModel& model,
                                             const DensityTrajectory& traj);

}  // namespace nibec
