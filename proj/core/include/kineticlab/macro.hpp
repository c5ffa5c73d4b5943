#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "kineticlab/collision.hpp"
#include "kineticlab/dyadic.hpp"
#include "kineticlab/fourier_grid.hpp"
#include "kineticlab/trajectory.hpp"
#include "kineticlab/velocity_grid.hpp"

namespace kb {

// Macroscopic coefficient fields of the hydrodynamic projection:
// Pf = {a(x) + xi . b(x) + (|xi|^2 - 3) c(x)} sqrt(mu).
struct MacroCoeffs {
  SpectralField a;  // 1 slice
  SpectralField b;  // 3 slices
  SpectralField c;  // 1 slice
};

struct MacroDecomposition {
  MacroCoeffs coeffs;
  SpectralField pf;     // macroscopic part, full velocity resolution
  SpectralField micro;  // f - Pf
};

// High-order moment fields: theta holds the 3x3 matrix Theta_im(f) with
// Theta_im(f) = ((xi_i xi_m - 1) sqrt(mu), f)_xi stored at slice 3*i + m,
// lambda holds Lambda_i(f) = (1/10) ((|xi|^2 - 5) xi_i sqrt(mu), f)_xi.
struct MomentSet {
  SpectralField theta;   // 9 slices
  SpectralField lambda;  // 3 slices
};

// Weights of the temporal interactive functional; the estimates only require
// the ordering 0 < kappa2 << kappa1 << 1 (and 0 < kappa3 << 1 downstream).
struct InteractiveParams {
  double kappa1 = 0.1;
  double kappa2 = 0.01;
  double kappa3 = 0.05;

  void validate() const {
    require(0.0 < kappa2 && kappa2 < kappa1 && kappa1 < 1.0,
            "need 0 < kappa2 < kappa1 < 1");
    require(0.0 < kappa3 && kappa3 < 1.0, "need 0 < kappa3 < 1");
  }
};

// Residuals of the five-equation fluid-type moment system along a trajectory:
// max over evaluated times of the L^2_x norm of LHS - RHS, per equation
// (vector/matrix equations combined over components in l^2).
struct FluidResidual {
  std::array<double, 5> max_residual{};
  std::vector<double> eval_times;
  std::vector<std::array<double, 5>> per_time;
};

// Discrete orthogonal projection P onto span{sqrt(mu), xi_i sqrt(mu),
// (|xi|^2 - 3) sqrt(mu)} under the velocity-grid quadrature, plus the moment
// functionals and derived diagnostics built on it. Using the Gram solve (not
// the analytic normalizations) makes idempotence and orthogonality exact in
// the discrete inner product.
class MacroProjector {
 public:
  explicit MacroProjector(std::shared_ptr<const VelocityGrid> vgrid);

  const VelocityGrid& vgrid() const { return *vgrid_; }

  MacroDecomposition project(const SpectralField& f) const;
  MomentSet moments(const SpectralField& f) const;

  // E^int_q(f): sum_i (d_i Delta_q c, Lambda_i(Delta_q {I-P} f))
  //   + kappa1 sum_im (d_i Delta_q b_m + d_m Delta_q b_i, Theta_im(Delta_q {I-P} f))
  //   + kappa2 sum_i (d_i Delta_q a, Delta_q b_i), all L^2_x inner products.
  double interactive_functional(const SpectralField& f, int q, const DyadicSystem& dyadic,
                                const InteractiveParams& params) const;

  // Evaluates the five moment equations (continuity, momentum, energy, and
  // the two high-order moment equations with transport/collision sources)
  // along the trajectory. Time derivatives use three-point stencils (centered
  // in the interior, one-sided at the endpoints). The two source-bearing
  // equations need a nonlinear-collision evaluation per time; time_stride
  // subsamples the evaluation times (endpoints always included).
  FluidResidual fluid_residual(const DistributionTrajectory& traj,
                               const CollisionTables& tables, int time_stride = 1) const;

  const Eigen::MatrixXd& basis() const { return basis_; }

 private:
  std::shared_ptr<const VelocityGrid> vgrid_;
  Eigen::MatrixXd basis_;        // Nv x 5 invariant directions
  Eigen::MatrixXd proj_;         // 5 x Nv, Gram-inverse times weighted basis^T
  Eigen::MatrixXd moment_rows_;  // 12 x Nv: Theta rows (i*3+m), then Lambda rows
};

}  // namespace kb
