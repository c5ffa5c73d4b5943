#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kineticlab/collision.hpp"
#include "kineticlab/dyadic.hpp"
#include "kineticlab/macro.hpp"
#include "kineticlab/norms.hpp"
#include "kineticlab/solver.hpp"
#include "kineticlab/trajectory.hpp"

namespace kb {

// Randomized-trial parameters for the inequality harness.
struct TrialSpec {
  std::uint64_t seed = 2024;
  int n_trials = 100;
  double spectral_decay = 2.0;  // power-law decay of spatial coefficients
  double amplitude = 1.0;
  enum class FieldClass { General, MacroOnly, MicroOnly, Trajectory } field_class =
      FieldClass::General;
  int n_times = 3;   // snapshots per sampled trajectory
  double T = 1.0;    // time window of sampled trajectories
  double gamma_prune = 3e-2;  // pruning for nonlinear-term evaluations in trials
  int solver_runs = 3;        // runs for the solver-trajectory entries

  void validate() const {
    require(n_trials >= 1 && n_times >= 2, "need n_trials >= 1 and n_times >= 2");
    require(spectral_decay > 0.0 && amplitude >= 0.0 && T > 0.0, "bad trial parameters");
  }
};

struct TrialRow {
  int trial = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool skipped = false;
};

struct InequalityReport {
  std::string id;
  std::vector<TrialRow> rows;
  double max_ratio = 0.0;
  double min_ratio = 0.0;  // of non-skipped rows (the measured constant for lower bounds)
  double fitted_C = 0.0;   // max ratio over non-skipped trials
  double refinement_drift = 1.0;  // refined fitted_C / base fitted_C (1 if not rerun)
  int skipped = 0;
  bool exact_check = false;  // constant-1 inequality asserted per trial
  bool exact_pass = true;
  bool hard_violation = false;  // RHS = 0 with LHS > 0, or exact-check failure
  std::string note;
};

// Grids and precomputed operators a check runs against.
struct VerifyContext {
  std::shared_ptr<const FourierGrid> grid;
  std::shared_ptr<const VelocityGrid> vgrid;
  std::shared_ptr<const CollisionTables> tables;
  std::shared_ptr<const DyadicSystem> dyadic;
  std::shared_ptr<const MacroProjector> proj;

  static VerifyContext make(int spatial_dim, int x_points, double vel_half_width,
                            int vel_points, int sphere_nodes, const KernelParams& kp,
                            double assembly_prune = 1e-4);
};

// Registered estimate identifiers, in suite order.
const std::vector<std::string>& registry_ids();

// Deterministic random fields: spatial coefficients with power-law decay in k,
// Gaussian-weighted decay in xi, projected per field class. `stream`
// distinguishes roles (f/g/h) and time indices within a trial.
SpectralField sample_snapshot(const TrialSpec& spec, const VerifyContext& ctx,
                              std::uint64_t stream);
DistributionTrajectory sample_trajectory(const TrialSpec& spec, const VerifyContext& ctx,
                                         std::uint64_t stream);

// Evaluates one registered estimate over sampled trials; when `refined` is
// given, reruns a reduced trial set there and reports the constant's drift.
InequalityReport run_check(const std::string& id, const TrialSpec& spec,
                           const VerifyContext& ctx, const VerifyContext* refined = nullptr,
                           int refined_trials = 25);

struct SuiteResult {
  std::vector<InequalityReport> reports;
  bool pass = true;  // no exact-check failure, no hard violation, drift within 2x
};

SuiteResult full_suite(const TrialSpec& spec, const VerifyContext& ctx,
                       const VerifyContext* refined = nullptr, int refined_trials = 25);

// Inequality ratios evaluated along one completed solver run (used by the
// macroscopic-dissipation and a-priori entries, which are statements about
// solutions rather than arbitrary fields).
struct RunRatios {
  double macro_diss_lhs = 0.0, macro_diss_rhs = 0.0, macro_diss_ratio = 0.0;
  double apriori_lhs = 0.0, apriori_rhs = 0.0, apriori_ratio = 0.0;
};
RunRatios run_ratios(const VerifyContext& ctx, const SpectralField& f0,
                     const EnergyFunctionals& energy);

}  // namespace kb
