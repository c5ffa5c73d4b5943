#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "kineticlab/collision.hpp"
#include "kineticlab/dyadic.hpp"
#include "kineticlab/macro.hpp"
#include "kineticlab/norms.hpp"
#include "kineticlab/trajectory.hpp"

namespace kb {

struct SolverConfig {
  double dt = 5e-3;
  double T = 1.0;
  double amplitude = 1e-3;
  int picard_max = 8;
  double picard_tol = 1e-10;
  std::uint64_t seed = 1;
  double gamma_prune = 0.2;      // velocity-node pruning for the nonlinear term
  bool gamma_consistency = true;
  bool gamma_projection = true;
  bool implicit_loss = false;    // re-evaluate the loss coupling within the step
  int snapshot_stride = 1;       // record every k-th step in the trajectory

  void validate() const {
    require(dt > 0.0 && T > 0.0 && dt <= T, "need 0 < dt <= T");
    require(amplitude >= 0.0, "amplitude must be nonnegative");
    require(picard_max >= 1 && snapshot_stride >= 1, "counts must be positive");
  }

  CollisionTables::GammaOptions gamma_options() const {
    CollisionTables::GammaOptions o;
    o.prune = gamma_prune;
    o.consistency_correction = gamma_consistency;
    o.conservative_projection = gamma_projection;
    return o;
  }
};

// Exponential-Euler update with frozen right-hand side: per (k, xi) mode,
//   fhat <- e^{-z dt} fhat + (1 - e^{-z dt})/z rhshat,  z = i k.xi + nu(xi).
SpectralField linear_step(const SpectralField& f, double dt, const CollisionTables& tables,
                          const SpectralField& rhs);

// Cached per-mode propagator factors for a fixed (grid, velocity grid, dt).
class LinearPropagator {
 public:
  LinearPropagator(std::shared_ptr<const FourierGrid> grid,
                   std::shared_ptr<const VelocityGrid> vgrid, const Eigen::VectorXd& nu,
                   double dt);
  // f <- decay .* f + source .* rhs (in place).
  void advance(SpectralField& f, const SpectralField& rhs) const;
  double dt() const { return dt_; }

 private:
  std::shared_ptr<const FourierGrid> grid_;
  std::shared_ptr<const VelocityGrid> vgrid_;
  double dt_;
  std::vector<cplx> decay_, source_;  // slice-major, like SpectralField
};

struct StepDiagnostics {
  double t = 0.0;
  EnergyFunctionals energy;      // functionals over [0, t]
  double inst_norm = 0.0;        // instantaneous L^2_xi Besov-3/2 norm of f(t)
  double positivity_margin = 0.0;  // min over (x, xi) of mu + sqrt(mu) f
  double mean_a = 0.0;             // spatial mean of the density coefficient
  double norm_a = 0.0, norm_b = 0.0, norm_c = 0.0;  // L^2_x of macro coefficients
};

struct DiagnosticsLog {
  std::vector<StepDiagnostics> steps;
};

struct SolveResult {
  DistributionTrajectory traj;
  DiagnosticsLog log;
};

// Shared context for time marching: collision tables plus the projection,
// dyadic system, and propagator caches the diagnostics need.
class Solver {
 public:
  Solver(std::shared_ptr<const CollisionTables> tables,
         std::shared_ptr<const FourierGrid> grid);

  const MacroProjector& projector() const { return proj_; }
  const std::shared_ptr<const DyadicSystem>& dyadic() const { return dyadic_; }
  const CollisionTables& tables() const { return *tables_; }

  // Time-march f' = -xi.grad f - L f + Gamma(f, f) from f0 over [0, T].
  SolveResult direct_solve(const SpectralField& f0, const SolverConfig& cfg) const;

  struct IterationState {
    int n = 0;
    DistributionTrajectory prev, curr;
    std::vector<double> ytilde_history;
  };

  // Starting iterate: f^0 constant in time, equal to the initial datum.
  IterationState picard_init(const SpectralField& f0, const SolverConfig& cfg) const;
  // One sweep of the iteration {d_t + xi.grad + nu} f^{n+1} = K f^n
  //   + Gamma_gain(f^n, f^n) - Gamma_loss(f^n, f^{n+1}), with the implicit
  // loss coupling lagged one time step (or re-evaluated once in-step when
  // implicit_loss is set). Records Ytilde of the new iterate.
  IterationState picard_sweep(const IterationState& state, const SolverConfig& cfg) const;

  // Ytilde of the difference of two trajectories sharing times/grids.
  double ytilde_of_difference(const DistributionTrajectory& x,
                              const DistributionTrajectory& y) const;

  // Sup-in-time relative L^2_{xi,x} gap between runs at dt and dt/2.
  double uniqueness_probe(const SpectralField& f0, const SolverConfig& cfg) const;

 private:
  const LinearPropagator& propagator(double dt) const;

  std::shared_ptr<const CollisionTables> tables_;
  std::shared_ptr<const FourierGrid> grid_;
  MacroProjector proj_;
  std::shared_ptr<const DyadicSystem> dyadic_;
  mutable std::vector<std::unique_ptr<LinearPropagator>> props_;  // keyed by dt
  mutable std::vector<double> prop_dts_;
};

// Initial-data menu, all returning real (Hermitian-symmetric) snapshots
// scaled so the largest velocity-weighted spatial amplitude is `amplitude`.
enum class InitKind { Cosine, Random, Macroscopic };
SpectralField initial_data(std::shared_ptr<const FourierGrid> grid,
                           std::shared_ptr<const VelocityGrid> vgrid, InitKind kind,
                           double amplitude, std::uint64_t seed);

}  // namespace kb
