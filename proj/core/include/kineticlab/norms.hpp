#pragma once

#include <Eigen/Dense>
#include <limits>
#include <memory>
#include <vector>

#include "kineticlab/collision.hpp"
#include "kineticlab/dyadic.hpp"
#include "kineticlab/macro.hpp"
#include "kineticlab/trajectory.hpp"

namespace kb {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Besov space B^s_{p,r} parameters (p: spatial Lebesgue exponent, r: dyadic
// summation exponent); homogeneous switches to the homogeneous blocks, which
// exclude the spatial mean.
struct BesovSpec {
  double s = 1.5;
  double p = 2.0;
  double r = 1.0;
  bool homogeneous = false;

  void validate() const {
    require(p >= 1.0 && r >= 1.0, "Lebesgue exponents must be >= 1");
  }
};

// Mixed time/velocity/space norm parameters. rho1 is the time exponent over
// [0, T], rho2 the velocity exponent; nu_weighted inserts the collision
// frequency inside the velocity integral (the nu-weighted L^2_xi norm).
struct CLSpec {
  double rho1 = 2.0;
  double rho2 = 2.0;
  BesovSpec besov{};
  bool nu_weighted = false;

  void validate() const {
    besov.validate();
    require(rho1 >= 1.0 && rho2 >= 1.0, "Lebesgue exponents must be >= 1");
  }
};

// Mixed velocity/space norm of one dyadic block of a snapshot: the velocity
// reduction (exponent rho2, quadrature weights, optional nu weight) is taken
// pointwise in x, then the L^p_x norm. Single-slice fields are treated as
// plain spatial fields (no velocity reduction).
double block_mixed_norm(const DyadicSystem& dyadic, const SpectralField& f, int q,
                        double p, double rho2, bool homogeneous,
                        const VelocityGrid* vgrid = nullptr,
                        const Eigen::VectorXd* nu = nullptr);

// l^r combination of per-block values (r = infinity gives the max).
double lr_combine(const std::vector<double>& terms, double r);

// Besov norm: l^r over q of 2^{qs} times the block norm; multi-slice fields
// reduce the velocity variable first (exponent rho2) inside each block.
double besov_norm(const SpectralField& f, const BesovSpec& spec, const DyadicSystem& dyadic,
                  double rho2 = 2.0, const VelocityGrid* vgrid = nullptr,
                  const Eigen::VectorXd* nu = nullptr);

// Block-first mixed norm: per block q, the L^{rho1}_T L^{rho2}_xi L^p_x norm
// over the whole trajectory is computed first (trapezoid in time), and the
// weighted l^r sum over q is taken last.
double chemin_lerner_norm(const DistributionTrajectory& traj, const CLSpec& spec,
                          const DyadicSystem& dyadic, const Eigen::VectorXd* nu = nullptr);

// Classical mixed norm: the Besov l^r sum is innermost (per time and velocity
// node), then the velocity and time integrals are applied outside it.
double classical_norm(const DistributionTrajectory& traj, const CLSpec& spec,
                      const DyadicSystem& dyadic, const Eigen::VectorXd* nu = nullptr);

// Energy functional, dissipation rates, and their combinations over [0, T]:
//   E = sup-in-time (per block) norm of f in L~inf_T L2_xi (B^{3/2}),
//   D = |grad_x (a,b,c)| in L~2_T (B^{1/2}) + |{I-P}f| in L~2_T L2_{xi,nu} (B^{3/2}),
//   Dtilde = |f| in L~2_T L2_{xi,nu} (B^{3/2}),  Y = E + D,  Ytilde = E + Dtilde.
struct EnergyFunctionals {
  double E = 0.0;
  double D = 0.0;
  double D_macro = 0.0;  // gradient-of-(a,b,c) part of D
  double D_micro = 0.0;  // microscopic nu-weighted part of D
  double Dtilde = 0.0;
  double Y = 0.0;
  double Ytilde = 0.0;
};

// Streaming accumulator for the energy functionals: feed snapshots in time
// order; per-block time suprema and trapezoid integrals are maintained
// incrementally so trajectories never need to be stored whole.
class EnergyAccumulator {
 public:
  EnergyAccumulator(const MacroProjector& proj, const CollisionTables& tables,
                    std::shared_ptr<const DyadicSystem> dyadic);

  void add_snapshot(double t, const SpectralField& f);
  EnergyFunctionals current() const;
  int snapshots_seen() const { return count_; }

 private:
  const MacroProjector& proj_;
  const CollisionTables& tables_;
  std::shared_ptr<const DyadicSystem> dyadic_;
  int nq_ = 0;  // block count, q = -1 .. q_max
  int count_ = 0;
  double prev_t_ = 0.0;
  // Per-block squared quantities at the previous snapshot and their running
  // trapezoid integrals / suprema.
  std::vector<double> sup_f2_, int_grad2_, int_micnu2_, int_fnu2_;
  std::vector<double> prev_grad2_, prev_micnu2_, prev_fnu2_;
};

EnergyFunctionals energy_functionals(const DistributionTrajectory& traj,
                                     const MacroProjector& proj,
                                     const CollisionTables& tables,
                                     std::shared_ptr<const DyadicSystem> dyadic);

}  // namespace kb
