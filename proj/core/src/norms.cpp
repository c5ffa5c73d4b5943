#include "kineticlab/norms.hpp"

#include <algorithm>
#include <cmath>

namespace kb {

namespace {

double block_mult(const DyadicSystem& dy, int q, double kmag, bool homogeneous) {
  if (homogeneous) return kmag > 0.0 ? dy.phi(std::ldexp(kmag, -q)) : 0.0;
  return dy.block_multiplier(q, kmag);
}

void q_range(const DyadicSystem& dy, bool homogeneous, int& q_lo, int& q_hi) {
  q_lo = homogeneous ? dy.hom_q_min() : -1;
  q_hi = dy.q_max();
}

double domain_volume(const FourierGrid& g) {
  return g.total_points() * g.cell_volume();
}

// L^{rho1}_T reduction of sampled values: trapezoid rule on |g|^{rho1}
// (supremum over samples for rho1 = infinity).
double time_reduce(const std::vector<double>& times, const std::vector<double>& g,
                   double rho1) {
  if (rho1 == kInf) return g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    acc += 0.5 * (times[i] - times[i - 1]) *
           (std::pow(g[i - 1], rho1) + std::pow(g[i], rho1));
  return std::pow(acc, 1.0 / rho1);
}

}  // namespace

double lr_combine(const std::vector<double>& terms, double r) {
  if (r == kInf) return terms.empty() ? 0.0 : *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::pow(t, r);
  return std::pow(acc, 1.0 / r);
}

double block_mixed_norm(const DyadicSystem& dyadic, const SpectralField& f, int q,
                        double p, double rho2, bool homogeneous, const VelocityGrid* vgrid,
                        const Eigen::VectorXd* nu) {
  const FourierGrid& g = f.grid();
  const int total = g.total_points();
  const int ns = f.n_slices();
  const bool vel = ns > 1;
  if (vel) require(vgrid && vgrid->size() == ns, "velocity grid required for multi-slice field");
  if (nu) require(static_cast<int>(nu->size()) == ns, "nu weight size mismatch");
  const double w = vel ? vgrid->weight() : 1.0;

  if (p == 2.0 && (!vel || rho2 == 2.0)) {
    // Parseval: no transforms needed.
    double sum = 0.0;
    for (int v = 0; v < ns; ++v) {
      const double wv = w * (nu ? (*nu)(v) : 1.0);
      const auto sl = f.slice(v);
      double s = 0.0;
      for (int k = 0; k < total; ++k) {
        const double m = block_mult(dyadic, q, g.kmag(k), homogeneous);
        s += m * m * std::norm(sl[k]);
      }
      sum += wv * s;
    }
    return std::sqrt(sum * domain_volume(g));
  }

  // General exponents: localize, transform to physical space, reduce the
  // velocity variable pointwise in x, then take the L^p_x norm.
  std::vector<cplx> spec(total), phys(total);
  std::vector<double> red(total, 0.0);
  for (int v = 0; v < ns; ++v) {
    const double wv = w * (nu ? (*nu)(v) : 1.0);
    const auto sl = f.slice(v);
    for (int k = 0; k < total; ++k)
      spec[k] = block_mult(dyadic, q, g.kmag(k), homogeneous) * sl[k];
    g.to_physical(spec, phys);
    for (int x = 0; x < total; ++x) {
      const double av = std::abs(phys[x]);
      if (!vel)
        red[x] = av;
      else if (rho2 == kInf)
        red[x] = std::max(red[x], av);
      else
        red[x] += wv * std::pow(av, rho2);
    }
  }
  for (int x = 0; x < total; ++x)
    if (vel && rho2 != kInf) red[x] = std::pow(red[x], 1.0 / rho2);

  if (p == kInf) return *std::max_element(red.begin(), red.end());
  double acc = 0.0;
  for (int x = 0; x < total; ++x) acc += std::pow(red[x], p);
  return std::pow(acc * g.cell_volume(), 1.0 / p);
}

double besov_norm(const SpectralField& f, const BesovSpec& spec, const DyadicSystem& dyadic,
                  double rho2, const VelocityGrid* vgrid, const Eigen::VectorXd* nu) {
  spec.validate();
  int q_lo, q_hi;
  q_range(dyadic, spec.homogeneous, q_lo, q_hi);
  std::vector<double> terms;
  for (int q = q_lo; q <= q_hi; ++q)
    terms.push_back(std::pow(2.0, q * spec.s) *
                    block_mixed_norm(dyadic, f, q, spec.p, rho2, spec.homogeneous, vgrid, nu));
  return lr_combine(terms, spec.r);
}

double chemin_lerner_norm(const DistributionTrajectory& traj, const CLSpec& spec,
                          const DyadicSystem& dyadic, const Eigen::VectorXd* nu) {
  spec.validate();
  traj.validate();
  require(!spec.nu_weighted || nu, "nu-weighted norm needs a collision-frequency table");
  const Eigen::VectorXd* use_nu = spec.nu_weighted ? nu : nullptr;
  const VelocityGrid* vg = traj.vgrid.get();
  int q_lo, q_hi;
  q_range(dyadic, spec.besov.homogeneous, q_lo, q_hi);

  std::vector<double> terms;
  std::vector<double> g(traj.size());
  for (int q = q_lo; q <= q_hi; ++q) {
    for (int s = 0; s < traj.size(); ++s)
      g[s] = block_mixed_norm(dyadic, traj.snapshots[s], q, spec.besov.p, spec.rho2,
                              spec.besov.homogeneous, vg, use_nu);
    terms.push_back(std::pow(2.0, q * spec.besov.s) * time_reduce(traj.times, g, spec.rho1));
  }
  return lr_combine(terms, spec.besov.r);
}

double classical_norm(const DistributionTrajectory& traj, const CLSpec& spec,
                      const DyadicSystem& dyadic, const Eigen::VectorXd* nu) {
  spec.validate();
  traj.validate();
  require(!spec.nu_weighted || nu, "nu-weighted norm needs a collision-frequency table");
  const bool weighted = spec.nu_weighted;
  const VelocityGrid& vg = *traj.vgrid;

  std::vector<double> per_time(traj.size());
  for (int s = 0; s < traj.size(); ++s) {
    const SpectralField& snap = traj.snapshots[s];
    const int ns = snap.n_slices();
    SpectralField one(snap.grid_ptr(), 1);
    double red = 0.0;
    for (int v = 0; v < ns; ++v) {
      std::copy(snap.slice(v).begin(), snap.slice(v).end(), one.slice(0).begin());
      const double bv = besov_norm(one, spec.besov, dyadic);
      if (ns == 1) {
        red = bv;
      } else if (spec.rho2 == kInf) {
        red = std::max(red, bv);
      } else {
        const double wv = vg.weight() * (weighted ? (*nu)(v) : 1.0);
        red += wv * std::pow(bv, spec.rho2);
      }
    }
    per_time[s] = (snap.n_slices() > 1 && spec.rho2 != kInf)
                      ? std::pow(red, 1.0 / spec.rho2)
                      : red;
  }
  return time_reduce(traj.times, per_time, spec.rho1);
}

EnergyAccumulator::EnergyAccumulator(const MacroProjector& proj, const CollisionTables& tables,
                                     std::shared_ptr<const DyadicSystem> dyadic)
    : proj_(proj), tables_(tables), dyadic_(std::move(dyadic)) {
  nq_ = dyadic_->q_max() + 2;  // q = -1 .. q_max
  sup_f2_.assign(nq_, 0.0);
  int_grad2_.assign(nq_, 0.0);
  int_micnu2_.assign(nq_, 0.0);
  int_fnu2_.assign(nq_, 0.0);
  prev_grad2_.assign(nq_, 0.0);
  prev_micnu2_.assign(nq_, 0.0);
  prev_fnu2_.assign(nq_, 0.0);
}

void EnergyAccumulator::add_snapshot(double t, const SpectralField& f) {
  const FourierGrid& g = f.grid();
  require(g == dyadic_->grid(), "snapshot grid does not match dyadic system");
  const int total = g.total_points();
  const int nv = proj_.vgrid().size();
  require(f.n_slices() == nv, "snapshot velocity count mismatch");
  const double w = proj_.vgrid().weight();
  const Eigen::VectorXd& nu = tables_.nu();

  const MacroDecomposition dec = proj_.project(f);

  // Per-mode aggregates over the velocity variable; block sums then cost
  // only one pass per q.
  std::vector<double> sf(total, 0.0), sfnu(total, 0.0), smic(total, 0.0), sgrad(total, 0.0);
  for (int v = 0; v < nv; ++v) {
    const auto fs = f.slice(v);
    const auto ms = dec.micro.slice(v);
    const double wnu = w * nu(v);
    for (int k = 0; k < total; ++k) {
      const double f2 = std::norm(fs[k]);
      sf[k] += w * f2;
      sfnu[k] += wnu * f2;
      smic[k] += wnu * std::norm(ms[k]);
    }
  }
  for (int k = 0; k < total; ++k) {
    const double k2 = g.kmag(k) * g.kmag(k);
    double c2 = std::norm(dec.coeffs.a.slice(0)[k]) + std::norm(dec.coeffs.c.slice(0)[k]);
    for (int i = 0; i < 3; ++i) c2 += std::norm(dec.coeffs.b.slice(i)[k]);
    sgrad[k] = k2 * c2;
  }

  for (int qi = 0; qi < nq_; ++qi) {
    const int q = qi - 1;
    double f2 = 0.0, fnu2 = 0.0, mic2 = 0.0, grad2 = 0.0;
    for (int k = 0; k < total; ++k) {
      const double m = dyadic_->block_multiplier(q, g.kmag(k));
      const double m2 = m * m;
      f2 += m2 * sf[k];
      fnu2 += m2 * sfnu[k];
      mic2 += m2 * smic[k];
      grad2 += m2 * sgrad[k];
    }
    sup_f2_[qi] = std::max(sup_f2_[qi], f2);
    if (count_ > 0) {
      const double half_dt = 0.5 * (t - prev_t_);
      int_grad2_[qi] += half_dt * (prev_grad2_[qi] + grad2);
      int_micnu2_[qi] += half_dt * (prev_micnu2_[qi] + mic2);
      int_fnu2_[qi] += half_dt * (prev_fnu2_[qi] + fnu2);
    }
    prev_grad2_[qi] = grad2;
    prev_micnu2_[qi] = mic2;
    prev_fnu2_[qi] = fnu2;
  }
  require(count_ == 0 || t > prev_t_, "snapshots must arrive in increasing time order");
  prev_t_ = t;
  ++count_;
}

EnergyFunctionals EnergyAccumulator::current() const {
  const double vol = domain_volume(dyadic_->grid());
  EnergyFunctionals out;
  for (int qi = 0; qi < nq_; ++qi) {
    const int q = qi - 1;
    const double w32 = std::pow(2.0, 1.5 * q);
    const double w12 = std::pow(2.0, 0.5 * q);
    out.E += w32 * std::sqrt(vol * sup_f2_[qi]);
    out.D_macro += w12 * std::sqrt(vol * int_grad2_[qi]);
    out.D_micro += w32 * std::sqrt(vol * int_micnu2_[qi]);
    out.Dtilde += w32 * std::sqrt(vol * int_fnu2_[qi]);
  }
  out.D = out.D_macro + out.D_micro;
  out.Y = out.E + out.D;
  out.Ytilde = out.E + out.Dtilde;
  return out;
}

EnergyFunctionals energy_functionals(const DistributionTrajectory& traj,
                                     const MacroProjector& proj, const CollisionTables& tables,
                                     std::shared_ptr<const DyadicSystem> dyadic) {
  traj.validate();
  EnergyAccumulator acc(proj, tables, std::move(dyadic));
  for (int s = 0; s < traj.size(); ++s) acc.add_snapshot(traj.times[s], traj.snapshots[s]);
  return acc.current();
}

}  // namespace kb
