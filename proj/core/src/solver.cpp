#include "kineticlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kineticlab/rng.hpp"

namespace kb {

namespace {

double domain_volume(const FourierGrid& g) {
  return g.total_points() * g.cell_volume();
}

double l2x_norm(const FourierGrid& g, std::span<const cplx> u) {
  double s = 0.0;
  for (int k = 0; k < g.total_points(); ++k) s += std::norm(u[k]);
  return std::sqrt(s * domain_volume(g));
}

// Full L^2_{xi,x} norm of a snapshot (velocity quadrature times Parseval).
double snapshot_l2(const VelocityGrid& vg, const SpectralField& f) {
  const FourierGrid& g = f.grid();
  double s = 0.0;
  for (int v = 0; v < f.n_slices(); ++v) {
    const auto sl = f.slice(v);
    for (int k = 0; k < g.total_points(); ++k) s += std::norm(sl[k]);
  }
  return std::sqrt(s * vg.weight() * domain_volume(g));
}

}  // namespace

SpectralField linear_step(const SpectralField& f, double dt, const CollisionTables& tables,
                          const SpectralField& rhs) {
  const int nv = tables.vgrid().size();
  require(f.n_slices() == nv && rhs.n_slices() == nv, "snapshot velocity count mismatch");
  require(f.grid() == rhs.grid(), "grid mismatch");
  const FourierGrid& g = f.grid();
  const int total = g.total_points();

  SpectralField out = f;
  for (int v = 0; v < nv; ++v) {
    const Vec3& xi = tables.vgrid().node(v);
    const double nu = tables.nu()(v);
    auto fo = out.slice(v);
    const auto rs = rhs.slice(v);
    for (int k = 0; k < total; ++k) {
      const auto& kv = g.kvec(k);
      const cplx z{nu, kv[0] * xi[0] + kv[1] * xi[1] + kv[2] * xi[2]};
      const cplx e = std::exp(-z * dt);
      fo[k] = e * fo[k] + (1.0 - e) / z * rs[k];
    }
  }
  return out;
}

LinearPropagator::LinearPropagator(std::shared_ptr<const FourierGrid> grid,
                                   std::shared_ptr<const VelocityGrid> vgrid,
                                   const Eigen::VectorXd& nu, double dt)
    : grid_(std::move(grid)), vgrid_(std::move(vgrid)), dt_(dt) {
  const int total = grid_->total_points();
  const int nv = vgrid_->size();
  decay_.resize(static_cast<std::size_t>(nv) * total);
  source_.resize(decay_.size());
  for (int v = 0; v < nv; ++v) {
    const Vec3& xi = vgrid_->node(v);
    for (int k = 0; k < total; ++k) {
      const auto& kv = grid_->kvec(k);
      const cplx z{nu(v), kv[0] * xi[0] + kv[1] * xi[1] + kv[2] * xi[2]};
      const cplx e = std::exp(-z * dt_);
      decay_[static_cast<std::size_t>(v) * total + k] = e;
      source_[static_cast<std::size_t>(v) * total + k] = (1.0 - e) / z;
    }
  }
}

void LinearPropagator::advance(SpectralField& f, const SpectralField& rhs) const {
  require(f.grid() == *grid_ && rhs.grid() == *grid_, "grid mismatch");
  const std::size_t n = decay_.size();
  require(f.values().size() == n && rhs.values().size() == n, "field size mismatch");
  cplx* fv = f.values().data();
  const cplx* rv = rhs.values().data();
  for (std::size_t i = 0; i < n; ++i) fv[i] = decay_[i] * fv[i] + source_[i] * rv[i];
}

Solver::Solver(std::shared_ptr<const CollisionTables> tables,
               std::shared_ptr<const FourierGrid> grid)
    : tables_(std::move(tables)),
      grid_(std::move(grid)),
      proj_(tables_->vgrid_ptr()),
      dyadic_(std::make_shared<DyadicSystem>(grid_)) {}

const LinearPropagator& Solver::propagator(double dt) const {
  for (std::size_t i = 0; i < prop_dts_.size(); ++i)
    if (prop_dts_[i] == dt) return *props_[i];
  props_.push_back(
      std::make_unique<LinearPropagator>(grid_, tables_->vgrid_ptr(), tables_->nu(), dt));
  prop_dts_.push_back(dt);
  return *props_.back();
}

namespace {

// The five collision-invariant moments of the spatial-mean mode are exact
// constants of the dynamics; the exponential update damps them slightly, so
// they are restored after every step.
class MeanModeRestorer {
 public:
  MeanModeRestorer(const MacroProjector& proj, const CollisionTables& tables,
                   const SpectralField& f0)
      : proj_(proj), w_(tables.vgrid().weight()) {
    init_ = coeffs(f0);
  }

  void restore(SpectralField& f) const {
    const Eigen::VectorXcd cur = coeffs(f);
    const Eigen::VectorXcd delta = init_ - cur;
    const Eigen::MatrixXd& basis = proj_.basis();
    for (int v = 0; v < f.n_slices(); ++v) {
      cplx add{0.0, 0.0};
      for (int m = 0; m < 5; ++m) add += basis(v, m) * delta(m);
      f.slice(v)[0] += add;
    }
  }

 private:
  Eigen::VectorXcd coeffs(const SpectralField& f) const {
    const Eigen::MatrixXd& basis = proj_.basis();
    Eigen::VectorXcd mom = Eigen::VectorXcd::Zero(5);
    for (int v = 0; v < f.n_slices(); ++v)
      for (int m = 0; m < 5; ++m) mom(m) += w_ * basis(v, m) * f.slice(v)[0];
    const Eigen::MatrixXd gram = w_ * basis.transpose() * basis;
    return gram.ldlt().solve(mom);
  }

  const MacroProjector& proj_;
  double w_;
  Eigen::VectorXcd init_;
};

double positivity_margin(const VelocityGrid& vg, const SpectralField& f) {
  const FourierGrid& g = f.grid();
  const int total = g.total_points();
  std::vector<cplx> phys(total);
  double margin = std::numeric_limits<double>::infinity();
  for (int v = 0; v < f.n_slices(); ++v) {
    g.to_physical(f.slice(v), phys);
    const double mu = vg.mu(v), sq = vg.sqmu(v);
    for (int x = 0; x < total; ++x)
      margin = std::min(margin, mu + sq * phys[x].real());
  }
  return margin;
}

}  // namespace

SolveResult Solver::direct_solve(const SpectralField& f0, const SolverConfig& cfg) const {
  cfg.validate();
  require(f0.grid() == *grid_, "initial datum grid mismatch");
  const int nsteps = static_cast<int>(std::llround(cfg.T / cfg.dt));
  require(nsteps >= 1, "time window shorter than one step");
  const LinearPropagator& prop = propagator(cfg.dt);
  const auto gopt = cfg.gamma_options();

  SolveResult out;
  out.traj.vgrid = tables_->vgrid_ptr();
  EnergyAccumulator acc(proj_, *tables_, dyadic_);
  MeanModeRestorer restorer(proj_, *tables_, f0);

  SpectralField f = f0;
  auto record = [&](int step, double t) {
    acc.add_snapshot(t, f);
    StepDiagnostics d;
    d.t = t;
    d.energy = acc.current();
    require(std::isfinite(d.energy.Ytilde),
            "iteration diverged at step " + std::to_string(step));
    BesovSpec bs;
    bs.s = 1.5;
    d.inst_norm = besov_norm(f, bs, *dyadic_, 2.0, &tables_->vgrid());
    d.positivity_margin = positivity_margin(tables_->vgrid(), f);
    const MacroDecomposition dec = proj_.project(f);
    d.mean_a = dec.coeffs.a.slice(0)[0].real();
    d.norm_a = l2x_norm(*grid_, dec.coeffs.a.slice(0));
    double b2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double bi = l2x_norm(*grid_, dec.coeffs.b.slice(i));
      b2 += bi * bi;
    }
    d.norm_b = std::sqrt(b2);
    d.norm_c = l2x_norm(*grid_, dec.coeffs.c.slice(0));
    out.log.steps.push_back(d);
    if (step % cfg.snapshot_stride == 0 || step == nsteps) {
      out.traj.times.push_back(t);
      out.traj.snapshots.push_back(f);
    }
  };
  record(0, 0.0);

  for (int step = 1; step <= nsteps; ++step) {
    SpectralField rhs = apply_field(*tables_, FieldOp::K, f);
    rhs += apply_field_gamma(*tables_, f, f, gopt);
    prop.advance(f, rhs);
    restorer.restore(f);
    record(step, step * cfg.dt);
  }
  return out;
}

Solver::IterationState Solver::picard_init(const SpectralField& f0,
                                           const SolverConfig& cfg) const {
  cfg.validate();
  const int nsteps = static_cast<int>(std::llround(cfg.T / cfg.dt));
  IterationState st;
  st.n = 0;
  st.curr.vgrid = tables_->vgrid_ptr();
  for (int s = 0; s <= nsteps; ++s) {
    st.curr.times.push_back(s * cfg.dt);
    st.curr.snapshots.push_back(f0);
  }
  return st;
}

Solver::IterationState Solver::picard_sweep(const IterationState& state,
                                            const SolverConfig& cfg) const {
  cfg.validate();
  const DistributionTrajectory& fn = state.curr;
  fn.validate();
  const int nt = fn.size();
  require(nt >= 2, "iteration needs at least two time points");
  const LinearPropagator& prop = propagator(fn.times[1] - fn.times[0]);
  const auto gopt = cfg.gamma_options();

  IterationState next;
  next.n = state.n + 1;
  next.ytilde_history = state.ytilde_history;
  next.curr.vgrid = tables_->vgrid_ptr();
  next.curr.times = fn.times;
  next.curr.snapshots.reserve(nt);
  next.curr.snapshots.push_back(fn.snapshots.front());

  EnergyAccumulator acc(proj_, *tables_, dyadic_);
  MeanModeRestorer restorer(proj_, *tables_, fn.snapshots.front());
  acc.add_snapshot(fn.times[0], next.curr.snapshots.front());

  for (int s = 1; s < nt; ++s) {
    const SpectralField& fold = fn.snapshots[s - 1];
    const SpectralField& flag = next.curr.snapshots[s - 1];

    // K f^n + Gamma(f^n, f^n) + loss(f^n) . (f^n - f^{n+1}_lag): the last
    // term converts the self-interaction loss into the cross-iterate loss.
    auto make_rhs = [&](const SpectralField& loss_arg) {
      SpectralField rhs = apply_field(*tables_, FieldOp::K, fold);
      rhs += apply_field_gamma(*tables_, fold, fold, gopt);
      SpectralField dl = fold;
      dl -= loss_arg;
      rhs += apply_field_loss(*tables_, fold, dl);
      return rhs;
    };

    SpectralField fnew = flag;
    prop.advance(fnew, make_rhs(flag));
    if (cfg.implicit_loss) {
      SpectralField f2 = flag;
      prop.advance(f2, make_rhs(fnew));
      fnew = std::move(f2);
    }
    restorer.restore(fnew);
    acc.add_snapshot(fn.times[s], fnew);
    require(std::isfinite(acc.current().Ytilde),
            "iteration diverged at sweep " + std::to_string(next.n) + ", step " +
                std::to_string(s));
    next.curr.snapshots.push_back(std::move(fnew));
  }
  next.prev = state.curr;
  next.ytilde_history.push_back(acc.current().Ytilde);
  return next;
}

double Solver::ytilde_of_difference(const DistributionTrajectory& x,
                                    const DistributionTrajectory& y) const {
  require(x.size() == y.size(), "trajectory length mismatch");
  EnergyAccumulator acc(proj_, *tables_, dyadic_);
  for (int s = 0; s < x.size(); ++s) {
    require(x.times[s] == y.times[s], "trajectory time mismatch");
    SpectralField d = x.snapshots[s];
    d -= y.snapshots[s];
    acc.add_snapshot(x.times[s], d);
  }
  return acc.current().Ytilde;
}

double Solver::uniqueness_probe(const SpectralField& f0, const SolverConfig& cfg) const {
  SolverConfig coarse = cfg;
  coarse.snapshot_stride = 1;
  SolverConfig fine = cfg;
  fine.dt = 0.5 * cfg.dt;
  fine.snapshot_stride = 2;

  const SolveResult a = direct_solve(f0, coarse);
  const SolveResult b = direct_solve(f0, fine);
  require(a.traj.size() == b.traj.size(), "probe trajectories misaligned");

  double scale = 0.0;
  for (const auto& s : a.traj.snapshots)
    scale = std::max(scale, snapshot_l2(tables_->vgrid(), s));
  if (scale == 0.0) return 0.0;
  double gap = 0.0;
  for (int s = 0; s < a.traj.size(); ++s) {
    SpectralField d = a.traj.snapshots[s];
    d -= b.traj.snapshots[s];
    gap = std::max(gap, snapshot_l2(tables_->vgrid(), d));
  }
  return gap / scale;
}

SpectralField initial_data(std::shared_ptr<const FourierGrid> grid,
                           std::shared_ptr<const VelocityGrid> vgrid, InitKind kind,
                           double amplitude, std::uint64_t seed) {
  const int total = grid->total_points();
  const int nv = vgrid->size();
  SpectralField f(grid, nv, true);

  if (kind == InitKind::Cosine) {
    // amplitude * sqrt(mu) * cos(x_1): modes k = +/- e_1.
    int stride = total / grid->points_per_axis();  // first axis is slowest
    const int kp = stride;
    const int km = grid->conj_index(kp);
    for (int v = 0; v < nv; ++v) {
      f.slice(v)[kp] = 0.5 * amplitude * vgrid->sqmu(v);
      f.slice(v)[km] = 0.5 * amplitude * vgrid->sqmu(v);
    }
    return f;
  }

  CounterRng rng(seed, 7);
  for (int v = 0; v < nv; ++v) {
    const double xw = vgrid->sqmu(v);
    auto sl = f.slice(v);
    for (int k = 0; k < total; ++k) {
      if (grid->is_nyquist(k)) continue;
      const double decay = std::pow(1.0 + grid->kmag(k) * grid->kmag(k), -2.0);
      const std::uint64_t c = (static_cast<std::uint64_t>(v) * total + k) * 2;
      sl[k] = cplx{rng.normal(c), rng.normal(c + 1)} * (decay * xw);
    }
  }
  // Hermitian symmetrization so the physical field is real.
  for (int v = 0; v < nv; ++v) {
    auto sl = f.slice(v);
    for (int k = 0; k < total; ++k) {
      const int ck = grid->conj_index(k);
      if (ck < k) continue;
      const cplx h = 0.5 * (sl[k] + std::conj(sl[ck]));
      sl[k] = h;
      sl[ck] = std::conj(h);
    }
  }
  if (kind == InitKind::Macroscopic) {
    MacroProjector proj(vgrid);
    f = proj.project(f).pf;
  }

  // Scale so the largest relative perturbation sup |f| / sqrt(mu) in physical
  // space equals `amplitude` (so mu + sqrt(mu) f stays near-positive for
  // small amplitudes).
  double m = 0.0;
  std::vector<cplx> phys(total);
  for (int v = 0; v < nv; ++v) {
    grid->to_physical(f.slice(v), phys);
    for (int x = 0; x < total; ++x)
      m = std::max(m, std::abs(phys[x].real()) / vgrid->sqmu(v));
  }
  if (m > 0.0) f *= amplitude / m;
  return f;
}

}  // namespace kb
