#include "kineticlab/verify.hpp"

#include <algorithm>
#include <cmath>

#include "kineticlab/rng.hpp"

namespace kb {

namespace {

double domain_volume(const FourierGrid& g) {
  return g.total_points() * g.cell_volume();
}

// L^{rho1}_T reduction by trapezoid (sup for rho1 = infinity).
double time_reduce(const std::vector<double>& times, const std::vector<double>& g,
                   double rho1) {
  if (rho1 == kInf) return g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    acc += 0.5 * (times[i] - times[i - 1]) *
           (std::pow(g[i - 1], rho1) + std::pow(g[i], rho1));
  return std::pow(acc, 1.0 / rho1);
}

double trapezoid(const std::vector<double>& times, const std::vector<double>& g) {
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    acc += 0.5 * (times[i] - times[i - 1]) * (g[i - 1] + g[i]);
  return acc;
}

CLSpec make_cl(double s, double rho1, bool nu_weighted, bool homogeneous) {
  CLSpec c;
  c.rho1 = rho1;
  c.rho2 = 2.0;
  c.besov.s = s;
  c.besov.p = 2.0;
  c.besov.r = 1.0;
  c.besov.homogeneous = homogeneous;
  c.nu_weighted = nu_weighted;
  return c;
}

double cl_norm(const DistributionTrajectory& traj, const VerifyContext& ctx, double s,
               double rho1, bool nu_weighted, bool homogeneous = false) {
  return chemin_lerner_norm(traj, make_cl(s, rho1, nu_weighted, homogeneous), *ctx.dyadic,
                            &ctx.tables->nu());
}

// L^{rho1}_T L^2_{xi(,nu)} L^inf_x mixed norm (x-supremum innermost).
double linf_x_mixed(const DistributionTrajectory& traj, const VerifyContext& ctx,
                    double rho1, bool nu_weighted) {
  const FourierGrid& g = *ctx.grid;
  const int total = g.total_points();
  const double w = ctx.vgrid->weight();
  const Eigen::VectorXd& nu = ctx.tables->nu();
  std::vector<double> per_time(traj.size());
  std::vector<cplx> phys(total);
  for (int s = 0; s < traj.size(); ++s) {
    double acc = 0.0;
    for (int v = 0; v < traj.snapshots[s].n_slices(); ++v) {
      g.to_physical(traj.snapshots[s].slice(v), phys);
      double mx = 0.0;
      for (int x = 0; x < total; ++x) mx = std::max(mx, std::abs(phys[x]));
      acc += w * (nu_weighted ? nu(v) : 1.0) * mx * mx;
    }
    per_time[s] = std::sqrt(acc);
  }
  return time_reduce(traj.times, per_time, rho1);
}

// (Delta_q a, Delta_q b) over (x, xi) via Parseval; the multiplier is real so
// it enters squared.
double block_pair_inner(const VerifyContext& ctx, int q, const SpectralField& a,
                        const SpectralField& b) {
  const FourierGrid& g = *ctx.grid;
  const int total = g.total_points();
  const double w = ctx.vgrid->weight();
  double sum = 0.0;
  for (int v = 0; v < a.n_slices(); ++v) {
    const auto as = a.slice(v);
    const auto bs = b.slice(v);
    double s = 0.0;
    for (int k = 0; k < total; ++k) {
      const double m = ctx.dyadic->block_multiplier(q, g.kmag(k));
      s += m * m * (as[k].real() * bs[k].real() + as[k].imag() * bs[k].imag());
    }
    sum += w * s;
  }
  return sum * domain_volume(g);
}

// sum_q 2^{qs} [ int_0^T |(Delta_q gamma(t), Delta_q h(t))| dt ]^{1/2}.
double trilinear_lhs(const VerifyContext& ctx, const std::vector<SpectralField>& gammas,
                     const DistributionTrajectory& h, double s) {
  double out = 0.0;
  std::vector<double> g(h.size());
  for (int q = -1; q <= ctx.dyadic->q_max(); ++q) {
    for (int t = 0; t < h.size(); ++t)
      g[t] = std::abs(block_pair_inner(ctx, q, gammas[t], h.snapshots[t]));
    out += std::pow(2.0, q * s) * std::sqrt(trapezoid(h.times, g));
  }
  return out;
}

// ||Delta_q u||_{L^2_x}^2 of one spatial slice.
double block_l2x_sq(const VerifyContext& ctx, int q, std::span<const cplx> u) {
  const FourierGrid& g = *ctx.grid;
  double s = 0.0;
  for (int k = 0; k < g.total_points(); ++k) {
    const double m = ctx.dyadic->block_multiplier(q, g.kmag(k));
    s += m * m * std::norm(u[k]);
  }
  return s * domain_volume(g);
}

// sum_q 2^{qs} [ int ||Delta_q m(t)||^2_{L^2_x} dt ]^{1/2} for one moment slice.
double moment_lhs(const VerifyContext& ctx, const std::vector<SpectralField>& moms,
                  const std::vector<double>& times, int slice, double s) {
  double out = 0.0;
  std::vector<double> g(times.size());
  for (int q = -1; q <= ctx.dyadic->q_max(); ++q) {
    for (std::size_t t = 0; t < times.size(); ++t)
      g[t] = block_l2x_sq(ctx, q, moms[t].slice(slice));
    out += std::pow(2.0, q * s) * std::sqrt(trapezoid(times, g));
  }
  return out;
}

double lp_norm_slice(const FourierGrid& g, std::span<const cplx> u, double p) {
  const int total = g.total_points();
  std::vector<cplx> phys(total);
  g.to_physical(u, phys);
  if (p == kInf) {
    double mx = 0.0;
    for (int x = 0; x < total; ++x) mx = std::max(mx, std::abs(phys[x]));
    return mx;
  }
  double acc = 0.0;
  for (int x = 0; x < total; ++x) acc += std::pow(std::abs(phys[x]), p);
  return std::pow(acc * g.cell_volume(), 1.0 / p);
}

// Chemin-Lerner norm of a time sequence of single-slice spatial fields.
double scalar_cl(const std::vector<double>& times, const std::vector<SpectralField>& fields,
                 const VerifyContext& ctx, double s, double rho1, bool homogeneous) {
  const DyadicSystem& dy = *ctx.dyadic;
  const int q_lo = homogeneous ? dy.hom_q_min() : -1;
  double out = 0.0;
  std::vector<double> g(times.size());
  for (int q = q_lo; q <= dy.q_max(); ++q) {
    for (std::size_t t = 0; t < times.size(); ++t) {
      const auto sl = fields[t].slice(0);
      double acc = 0.0;
      for (int k = 0; k < ctx.grid->total_points(); ++k) {
        const double km = ctx.grid->kmag(k);
        const double m = homogeneous ? (km > 0.0 ? dy.phi(std::ldexp(km, -q)) : 0.0)
                                     : dy.block_multiplier(q, km);
        acc += m * m * std::norm(sl[k]);
      }
      g[t] = std::sqrt(acc * domain_volume(*ctx.grid));
    }
    out += std::pow(2.0, q * s) * time_reduce(times, g, rho1);
  }
  return out;
}

SpectralField sample_scalar(const TrialSpec& spec, const VerifyContext& ctx,
                            std::uint64_t stream) {
  const FourierGrid& g = *ctx.grid;
  const int total = g.total_points();
  SpectralField f(ctx.grid, 1, true);
  CounterRng rng(spec.seed, stream);
  auto sl = f.slice(0);
  for (int k = 0; k < total; ++k) {
    if (g.is_nyquist(k)) continue;
    const double decay = std::pow(1.0 + g.kmag(k), -spec.spectral_decay);
    sl[k] = cplx{rng.normal(2 * k), rng.normal(2 * k + 1)} * decay;
  }
  for (int k = 0; k < total; ++k) {
    const int ck = g.conj_index(k);
    if (ck < k) continue;
    const cplx h = 0.5 * (sl[k] + std::conj(sl[ck]));
    sl[k] = h;
    sl[ck] = std::conj(h);
  }
  f *= spec.amplitude;
  return f;
}

MacroDecomposition decompose(const VerifyContext& ctx, const SpectralField& f) {
  return ctx.proj->project(f);
}

DistributionTrajectory project_traj(const VerifyContext& ctx,
                                    const DistributionTrajectory& traj, bool macroscopic) {
  DistributionTrajectory out;
  out.vgrid = traj.vgrid;
  out.times = traj.times;
  for (const auto& s : traj.snapshots) {
    MacroDecomposition d = decompose(ctx, s);
    out.snapshots.push_back(macroscopic ? std::move(d.pf) : std::move(d.micro));
  }
  return out;
}

CollisionTables::GammaOptions gamma_opt(const TrialSpec& spec) {
  CollisionTables::GammaOptions o;
  o.prune = spec.gamma_prune;
  return o;
}

}  // namespace

VerifyContext VerifyContext::make(int spatial_dim, int x_points, double vel_half_width,
                                  int vel_points, int sphere_nodes, const KernelParams& kp,
                                  double assembly_prune) {
  VerifyContext ctx;
  ctx.grid = std::make_shared<FourierGrid>(spatial_dim, x_points);
  ctx.vgrid = std::make_shared<VelocityGrid>(vel_half_width, vel_points);
  auto sph = std::make_shared<SphereQuadrature>(sphere_nodes);
  ctx.tables = std::make_shared<CollisionTables>(ctx.vgrid, sph, kp, assembly_prune);
  ctx.dyadic = std::make_shared<DyadicSystem>(ctx.grid);
  ctx.proj = std::make_shared<MacroProjector>(ctx.vgrid);
  return ctx;
}

const std::vector<std::string>& registry_ids() {
  static const std::vector<std::string> ids = {
      "TRILINEAR", "TRILINEAR_X", "TRILINEAR_P", "NONLIN_ENERGY", "MOMENT_BOUND",
      "L_UPPER",   "MACRO_DISS",  "APRIORI",     "COERCIVITY",    "K_BOUND",
      "BLOCK_BOUND", "BERNSTEIN_EQUIV", "NH_EMBED", "CL_ORDER", "SERIES_CONV"};
  return ids;
}

SpectralField sample_snapshot(const TrialSpec& spec, const VerifyContext& ctx,
                              std::uint64_t stream) {
  spec.validate();
  const FourierGrid& g = *ctx.grid;
  const int total = g.total_points();
  const int nv = ctx.vgrid->size();
  SpectralField f(ctx.grid, nv, true);
  CounterRng rng(spec.seed, stream);
  for (int v = 0; v < nv; ++v) {
    const double xw = ctx.vgrid->sqmu(v);
    auto sl = f.slice(v);
    for (int k = 0; k < total; ++k) {
      if (g.is_nyquist(k)) continue;
      const double decay = std::pow(1.0 + g.kmag(k), -spec.spectral_decay);
      const std::uint64_t c = 2 * (static_cast<std::uint64_t>(v) * total + k);
      sl[k] = cplx{rng.normal(c), rng.normal(c + 1)} * (decay * xw);
    }
  }
  for (int v = 0; v < nv; ++v) {
    auto sl = f.slice(v);
    for (int k = 0; k < total; ++k) {
      const int ck = g.conj_index(k);
      if (ck < k) continue;
      const cplx h = 0.5 * (sl[k] + std::conj(sl[ck]));
      sl[k] = h;
      sl[ck] = std::conj(h);
    }
  }
  f *= spec.amplitude;
  if (spec.field_class == TrialSpec::FieldClass::MacroOnly) return decompose(ctx, f).pf;
  if (spec.field_class == TrialSpec::FieldClass::MicroOnly) return decompose(ctx, f).micro;
  return f;
}

DistributionTrajectory sample_trajectory(const TrialSpec& spec, const VerifyContext& ctx,
                                         std::uint64_t stream) {
  DistributionTrajectory traj;
  traj.vgrid = ctx.vgrid;
  for (int s = 0; s < spec.n_times; ++s) {
    traj.times.push_back(spec.T * s / (spec.n_times - 1));
    traj.snapshots.push_back(sample_snapshot(spec, ctx, stream * 64 + s));
  }
  return traj;
}

namespace {

// --- per-trial evaluators -------------------------------------------------

TrialRow check_trilinear(const TrialSpec& spec, const VerifyContext& ctx, int trial,
                         bool besov_rhs) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const auto f = sample_trajectory(spec, ctx, base + 1);
  const auto g = sample_trajectory(spec, ctx, base + 2);
  const auto h = sample_trajectory(spec, ctx, base + 3);
  const double s = 1.5;

  std::vector<SpectralField> gammas;
  for (int t = 0; t < f.size(); ++t)
    gammas.push_back(
        apply_field_gamma(*ctx.tables, f.snapshots[t], g.snapshots[t], gamma_opt(spec)));
  const double lhs = trilinear_lhs(ctx, gammas, h, s);

  const double nh = std::sqrt(cl_norm(h, ctx, s, 2.0, true));
  double rhs;
  if (!besov_rhs) {
    rhs = nh * (std::sqrt(cl_norm(g, ctx, s, 2.0, true) * linf_x_mixed(f, ctx, kInf, false)) +
                std::sqrt(linf_x_mixed(f, ctx, 2.0, true) * cl_norm(g, ctx, s, kInf, false)) +
                std::sqrt(cl_norm(f, ctx, s, 2.0, true) * linf_x_mixed(g, ctx, kInf, false)) +
                std::sqrt(linf_x_mixed(g, ctx, 2.0, true) * cl_norm(f, ctx, s, kInf, false)));
  } else {
    rhs = std::numeric_limits<double>::infinity();
    for (bool hom : {false, true}) {
      const double rx =
          nh *
          (std::sqrt(cl_norm(g, ctx, s, 2.0, true) * cl_norm(f, ctx, 1.5, kInf, false, hom)) +
           std::sqrt(cl_norm(f, ctx, 1.5, 2.0, true, hom) * cl_norm(g, ctx, s, kInf, false)) +
           std::sqrt(cl_norm(f, ctx, s, 2.0, true) * cl_norm(g, ctx, 1.5, kInf, false, hom)) +
           std::sqrt(cl_norm(g, ctx, 1.5, 2.0, true, hom) * cl_norm(f, ctx, s, kInf, false)));
      rhs = std::min(rhs, rx);
    }
  }
  return {trial, lhs, rhs, 0.0, false};
}

TrialRow check_trilinear_p(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const auto f = sample_trajectory(spec, ctx, base + 1);
  const auto g = sample_trajectory(spec, ctx, base + 2);
  const auto h = sample_trajectory(spec, ctx, base + 3);
  const auto pf = project_traj(ctx, f, true);
  const auto pg = project_traj(ctx, g, true);
  const double s = 1.5;
  const double nh = std::sqrt(cl_norm(h, ctx, s, 2.0, true));

  auto gam = [&](const DistributionTrajectory& a, const DistributionTrajectory& b) {
    std::vector<SpectralField> out;
    for (int t = 0; t < a.size(); ++t)
      out.push_back(
          apply_field_gamma(*ctx.tables, a.snapshots[t], b.snapshots[t], gamma_opt(spec)));
    return out;
  };

  double worst_lhs = 0.0, worst_rhs = 0.0, worst = 0.0;
  auto consider = [&](double lhs, double rhs) {
    if (rhs > 0.0 && lhs / rhs > worst) {
      worst = lhs / rhs;
      worst_lhs = lhs;
      worst_rhs = rhs;
    } else if (worst == 0.0 && worst_rhs == 0.0) {
      worst_lhs = std::max(worst_lhs, lhs);
      worst_rhs = std::max(worst_rhs, rhs);
    }
  };

  // Gamma(Pf, g), Gamma(f, Pg), Gamma(Pf, Pg), each against its bound with
  // the best (smallest) of the inhomogeneous/homogeneous critical norms.
  {
    const double lhs = trilinear_lhs(ctx, gam(pf, g), h, s);
    double rhs = std::numeric_limits<double>::infinity();
    for (bool hom : {false, true})
      rhs = std::min(
          rhs, nh * (std::sqrt(cl_norm(g, ctx, s, 2.0, true) *
                               cl_norm(pf, ctx, 1.5, kInf, false, hom)) +
                     std::sqrt(cl_norm(g, ctx, 1.5, 2.0, true, hom) *
                               cl_norm(pf, ctx, s, kInf, false))));
    consider(lhs, rhs);
  }
  {
    const double lhs = trilinear_lhs(ctx, gam(f, pg), h, s);
    double rhs = std::numeric_limits<double>::infinity();
    for (bool hom : {false, true})
      rhs = std::min(
          rhs, nh * (std::sqrt(cl_norm(f, ctx, s, 2.0, true) *
                               cl_norm(pg, ctx, 1.5, kInf, false, hom)) +
                     std::sqrt(cl_norm(f, ctx, 1.5, 2.0, true, hom) *
                               cl_norm(pg, ctx, s, kInf, false))));
    consider(lhs, rhs);
  }
  {
    const double lhs = trilinear_lhs(ctx, gam(pf, pg), h, s);
    double rhs = std::numeric_limits<double>::infinity();
    for (bool hom : {false, true})
      rhs = std::min(
          rhs, nh * (std::sqrt(cl_norm(pg, ctx, s, kInf, false) *
                               cl_norm(pf, ctx, 1.5, 2.0, false, hom)) +
                     std::sqrt(cl_norm(pg, ctx, 1.5, kInf, false, hom) *
                               cl_norm(pf, ctx, s, 2.0, false))));
    consider(lhs, rhs);
  }
  return {trial, worst_lhs, worst_rhs, 0.0, false};
}

TrialRow check_nonlin_energy(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const auto f = sample_trajectory(spec, ctx, base + 1);
  const auto pf = project_traj(ctx, f, true);
  const auto mic = project_traj(ctx, f, false);
  const double s = 1.5;

  std::vector<SpectralField> g_pp, g_pm, g_mp, g_mm, g_tot;
  for (int t = 0; t < f.size(); ++t) {
    g_pp.push_back(apply_field_gamma(*ctx.tables, pf.snapshots[t], pf.snapshots[t],
                                     gamma_opt(spec)));
    g_pm.push_back(apply_field_gamma(*ctx.tables, pf.snapshots[t], mic.snapshots[t],
                                     gamma_opt(spec)));
    g_mp.push_back(apply_field_gamma(*ctx.tables, mic.snapshots[t], pf.snapshots[t],
                                     gamma_opt(spec)));
    g_mm.push_back(apply_field_gamma(*ctx.tables, mic.snapshots[t], mic.snapshots[t],
                                     gamma_opt(spec)));
    SpectralField tot = g_pp.back();
    tot += g_pm.back();
    tot += g_mp.back();
    tot += g_mm.back();
    g_tot.push_back(std::move(tot));
  }

  const EnergyFunctionals en = energy_functionals(f, *ctx.proj, *ctx.tables, ctx.dyadic);
  const double mic_nu2 = cl_norm(mic, ctx, s, 2.0, true);
  const double mic_inf = cl_norm(mic, ctx, s, kInf, false);
  const double pf_inf = cl_norm(pf, ctx, s, kInf, false);
  const double pf_hom2 = cl_norm(pf, ctx, s, 2.0, false, true);

  double worst = 0.0, wl = 0.0, wr = 0.0;
  auto consider = [&](double lhs, double rhs) {
    if (rhs > 0.0 && lhs / rhs > worst) {
      worst = lhs / rhs;
      wl = lhs;
      wr = rhs;
    }
  };
  consider(trilinear_lhs(ctx, g_tot, mic, s), std::sqrt(en.E) * en.D);
  consider(trilinear_lhs(ctx, g_pp, mic, s),
           std::sqrt(pf_hom2) * std::sqrt(pf_inf) * std::sqrt(mic_nu2));
  consider(trilinear_lhs(ctx, g_pm, mic, s), std::sqrt(pf_inf) * mic_nu2);
  consider(trilinear_lhs(ctx, g_mp, mic, s), std::sqrt(pf_inf) * mic_nu2);
  consider(trilinear_lhs(ctx, g_mm, mic, s), std::sqrt(mic_inf) * mic_nu2);
  if (wr == 0.0) {
    const double lhs = trilinear_lhs(ctx, g_tot, mic, s);
    return {trial, lhs, 0.0, 0.0, false};
  }
  return {trial, wl, wr, 0.0, false};
}

TrialRow check_moment_bound(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const auto f = sample_trajectory(spec, ctx, base + 1);
  const double s = 0.5;

  std::vector<SpectralField> moms;  // 12 slices: Theta rows then Lambda rows
  for (int t = 0; t < f.size(); ++t) {
    const SpectralField gam =
        apply_field_gamma(*ctx.tables, f.snapshots[t], f.snapshots[t], gamma_opt(spec));
    const MomentSet ms = ctx.proj->moments(gam);
    SpectralField m(ctx.grid, 12);
    for (int z = 0; z < 9; ++z)
      std::copy(ms.theta.slice(z).begin(), ms.theta.slice(z).end(), m.slice(z).begin());
    for (int z = 0; z < 3; ++z)
      std::copy(ms.lambda.slice(z).begin(), ms.lambda.slice(z).end(),
                m.slice(9 + z).begin());
    moms.push_back(std::move(m));
  }
  const EnergyFunctionals en = energy_functionals(f, *ctx.proj, *ctx.tables, ctx.dyadic);
  const double rhs = en.E * en.D;
  double lhs = 0.0;
  for (int z = 0; z < 12; ++z) lhs = std::max(lhs, moment_lhs(ctx, moms, f.times, z, s));
  return {trial, lhs, rhs, 0.0, false};
}

TrialRow check_l_upper(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const auto f = sample_trajectory(spec, ctx, base + 1);
  const auto mic = project_traj(ctx, f, false);
  const double s = 0.5;

  std::vector<SpectralField> moms;
  for (int t = 0; t < f.size(); ++t) {
    const SpectralField lm = apply_field(*ctx.tables, FieldOp::L, mic.snapshots[t]);
    const MomentSet ms = ctx.proj->moments(lm);
    SpectralField m(ctx.grid, 12);
    for (int z = 0; z < 9; ++z)
      std::copy(ms.theta.slice(z).begin(), ms.theta.slice(z).end(), m.slice(z).begin());
    for (int z = 0; z < 3; ++z)
      std::copy(ms.lambda.slice(z).begin(), ms.lambda.slice(z).end(),
                m.slice(9 + z).begin());
    moms.push_back(std::move(m));
  }
  const double rhs = cl_norm(mic, ctx, s, 2.0, true);
  double lhs = 0.0;
  for (int z = 0; z < 12; ++z) lhs = std::max(lhs, moment_lhs(ctx, moms, f.times, z, s));
  return {trial, lhs, rhs, 0.0, false};
}

TrialRow check_macro_diss(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const auto f = sample_trajectory(spec, ctx, base + 1);
  const EnergyFunctionals en = energy_functionals(f, *ctx.proj, *ctx.tables, ctx.dyadic);
  BesovSpec b0;
  b0.s = 1.5;
  const double f0n = besov_norm(f.snapshots.front(), b0, *ctx.dyadic, 2.0, ctx.vgrid.get());
  const double lhs = en.D_macro;
  const double rhs = f0n + en.E + en.D_micro + en.E * en.D;
  return {trial, lhs, rhs, 0.0, false};
}

TrialRow check_coercivity(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  TrialSpec ms = spec;
  ms.field_class = TrialSpec::FieldClass::MicroOnly;
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const SpectralField f = sample_snapshot(ms, ctx, base + 1);
  const SpectralField lf = apply_field(*ctx.tables, FieldOp::L, f);
  const SpectralField mic = decompose(ctx, f).micro;

  const FourierGrid& g = *ctx.grid;
  const double w = ctx.vgrid->weight();
  const Eigen::VectorXd& nu = ctx.tables->nu();
  double min_ratio = std::numeric_limits<double>::infinity();
  double wl = 0.0, wr = 0.0;
  for (int q = -1; q <= ctx.dyadic->q_max(); ++q) {
    const double num = block_pair_inner(ctx, q, lf, f);
    double den = 0.0;
    for (int v = 0; v < f.n_slices(); ++v) {
      const auto sl = mic.slice(v);
      double s = 0.0;
      for (int k = 0; k < g.total_points(); ++k) {
        const double m = ctx.dyadic->block_multiplier(q, g.kmag(k));
        s += m * m * std::norm(sl[k]);
      }
      den += w * nu(v) * s;
    }
    den *= domain_volume(g);
    if (den <= 0.0) continue;
    if (num / den < min_ratio) {
      min_ratio = num / den;
      wl = num;
      wr = den;
    }
  }
  if (!std::isfinite(min_ratio)) return {trial, 0.0, 0.0, 0.0, true};
  return {trial, wl, wr, 0.0, false};
}

TrialRow check_k_bound(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const SpectralField f = sample_snapshot(spec, ctx, base + 1);
  const SpectralField g = sample_snapshot(spec, ctx, base + 2);
  const SpectralField kf = apply_field(*ctx.tables, FieldOp::K, f);

  double worst = 0.0, wl = 0.0, wr = 0.0;
  for (int q = -1; q <= ctx.dyadic->q_max(); ++q) {
    const double num = std::abs(block_pair_inner(ctx, q, kf, g));
    const double nf = std::sqrt(block_pair_inner(ctx, q, f, f));
    const double ng = std::sqrt(block_pair_inner(ctx, q, g, g));
    const double den = nf * ng;
    if (den <= 0.0) continue;
    if (num / den > worst) {
      worst = num / den;
      wl = num;
      wr = den;
    }
  }
  if (wr == 0.0) return {trial, 0.0, 0.0, 0.0, true};
  return {trial, wl, wr, 0.0, false};
}

TrialRow check_block_bound(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const SpectralField f = sample_scalar(spec, ctx, base + 1);
  double worst = 0.0, wl = 0.0, wr = 0.0;
  for (double p : {1.0, 2.0, kInf}) {
    const double fn = lp_norm_slice(*ctx.grid, f.slice(0), p);
    if (fn <= 0.0) continue;
    for (int q = -1; q <= ctx.dyadic->q_max(); ++q) {
      const SpectralField bq = ctx.dyadic->block(q, f);
      const SpectralField sq = ctx.dyadic->low_pass(q, f);
      for (const SpectralField* u : {&bq, &sq}) {
        const double un = lp_norm_slice(*ctx.grid, u->slice(0), p);
        if (un / fn > worst) {
          worst = un / fn;
          wl = un;
          wr = fn;
        }
      }
    }
  }
  if (wr == 0.0) return {trial, 0.0, 0.0, 0.0, true};
  return {trial, wl, wr, 0.0, false};
}

TrialRow check_bernstein(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  std::vector<double> times;
  std::vector<SpectralField> fields;
  for (int s = 0; s < spec.n_times; ++s) {
    times.push_back(spec.T * s / (spec.n_times - 1));
    fields.push_back(sample_scalar(spec, ctx, (base + 1) * 64 + s));
  }
  const double s = 0.5;
  const FourierGrid& g = *ctx.grid;
  const DyadicSystem& dy = *ctx.dyadic;

  // |grad f| in the homogeneous space: per (q, t) combine axis derivatives in
  // L^2 before the time and block reductions.
  double num = 0.0;
  std::vector<double> gt(times.size());
  for (int q = dy.hom_q_min(); q <= dy.q_max(); ++q) {
    for (std::size_t t = 0; t < times.size(); ++t) {
      const auto sl = fields[t].slice(0);
      double acc = 0.0;
      for (int k = 0; k < g.total_points(); ++k) {
        const double km = g.kmag(k);
        const double m = km > 0.0 ? dy.phi(std::ldexp(km, -q)) : 0.0;
        acc += m * m * km * km * std::norm(sl[k]);
      }
      gt[t] = std::sqrt(acc * domain_volume(g));
    }
    num += std::pow(2.0, q * s) * time_reduce(times, gt, 2.0);
  }
  const double den = scalar_cl(times, fields, ctx, s + 1.0, 2.0, true);
  if (den <= 0.0) return {trial, num, den, 0.0, true};
  return {trial, num, den, 0.0, false};
}

TrialRow check_nh_embed(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  std::vector<double> times;
  std::vector<SpectralField> fields;
  for (int s = 0; s < spec.n_times; ++s) {
    times.push_back(spec.T * s / (spec.n_times - 1));
    fields.push_back(sample_scalar(spec, ctx, (base + 1) * 64 + s));
  }
  const double s = 0.5;
  const double lhs = scalar_cl(times, fields, ctx, s, 2.0, true);
  const double rhs = scalar_cl(times, fields, ctx, s, 2.0, false);
  if (rhs <= 0.0) return {trial, lhs, rhs, 0.0, lhs <= 0.0};
  return {trial, lhs, rhs, 0.0, false};
}

TrialRow check_cl_order(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const auto f = sample_trajectory(spec, ctx, base + 1);
  double worst = 0.0, wl = 0.0, wr = 0.0;
  // (smaller norm) / (larger norm) must not exceed 1.
  auto consider = [&](double smaller, double larger) {
    if (larger <= 0.0) return;
    if (smaller / larger > worst) {
      worst = smaller / larger;
      wl = smaller;
      wr = larger;
    }
  };
  const Eigen::VectorXd* nu = &ctx.tables->nu();
  {
    // r = 1 <= min(rho1, rho2): block-first dominates.
    for (double rho1 : {2.0, kInf}) {
      CLSpec c = make_cl(1.5, rho1, false, false);
      consider(classical_norm(f, c, *ctx.dyadic, nu), chemin_lerner_norm(f, c, *ctx.dyadic, nu));
    }
  }
  {
    // r = infinity >= max(rho1, rho2): block-first is dominated.
    CLSpec c = make_cl(1.5, 2.0, false, false);
    c.besov.r = kInf;
    consider(chemin_lerner_norm(f, c, *ctx.dyadic, nu), classical_norm(f, c, *ctx.dyadic, nu));
  }
  if (wr == 0.0) return {trial, 0.0, 0.0, 0.0, true};
  return {trial, wl, wr, 0.0, false};
}

TrialRow check_series_conv(const TrialSpec& spec, const VerifyContext& ctx, int trial) {
  const std::uint64_t base = static_cast<std::uint64_t>(trial) * 1024;
  const auto g = sample_trajectory(spec, ctx, base + 1);
  const double s = 1.5;
  const double gamma = ctx.tables->kernel().gamma;
  const FourierGrid& gr = *ctx.grid;
  const double w = ctx.vgrid->weight();

  const double den = cl_norm(g, ctx, s, 2.0, true);
  if (den <= 0.0) return {trial, 0.0, 0.0, 0.0, true};

  // c1(j): the normalized per-block sequence with the |xi|^gamma weight.
  const int q_max = ctx.dyadic->q_max();
  std::vector<double> c1(q_max + 2, 0.0);
  std::vector<double> gt(g.size());
  for (int j = -1; j <= q_max; ++j) {
    for (int t = 0; t < g.size(); ++t) {
      double acc = 0.0;
      for (int v = 0; v < g.snapshots[t].n_slices(); ++v) {
        const double xw = w * std::pow(std::sqrt(norm2(ctx.vgrid->node(v))), gamma);
        const auto sl = g.snapshots[t].slice(v);
        double sm = 0.0;
        for (int k = 0; k < gr.total_points(); ++k) {
          const double m = ctx.dyadic->block_multiplier(j, gr.kmag(k));
          sm += m * m * std::norm(sl[k]);
        }
        acc += xw * sm;
      }
      gt[t] = acc * domain_volume(gr);
    }
    c1[j + 1] = std::pow(2.0, j * s) * std::sqrt(trapezoid(g.times, gt)) / den;
  }
  double c1_l1 = 0.0;
  for (double c : c1) c1_l1 += c;

  double kernel_l1 = 0.0;
  for (int j = -4; j <= 4; ++j) kernel_l1 += std::pow(2.0, j * s);

  double conv = 0.0;
  for (int q = -1; q <= q_max + 4; ++q)
    for (int j = std::max(-1, q - 4); j <= std::min(q_max, q + 4); ++j)
      conv += std::pow(2.0, (q - j) * s) * c1[j + 1];

  // Both parts of the claim are constant-1 inequalities; report the larger
  // violation ratio.
  const double r1 = c1_l1;                        // vs 1
  const double r2 = conv / (kernel_l1 * c1_l1);   // vs 1
  if (r1 >= r2) return {trial, c1_l1, 1.0, 0.0, false};
  return {trial, conv, kernel_l1 * c1_l1, 0.0, false};
}

TrialRow check_apriori_run(const TrialSpec& spec, const VerifyContext& ctx, int run) {
  const double amps[3] = {1e-4, 3e-4, 1e-3};
  const double amp = amps[run % 3];
  Solver solver(ctx.tables, ctx.grid);
  SolverConfig cfg;
  cfg.dt = 5e-3;
  cfg.T = 0.5;
  cfg.amplitude = amp;
  cfg.seed = spec.seed + run;
  cfg.snapshot_stride = 1 << 20;  // diagnostics only, no stored trajectory needed
  const SpectralField f0 = initial_data(ctx.grid, ctx.vgrid, InitKind::Random, amp, cfg.seed);
  const SolveResult res = solver.direct_solve(f0, cfg);
  const RunRatios rr = run_ratios(ctx, f0, res.log.steps.back().energy);
  return {run, rr.apriori_lhs, rr.apriori_rhs, 0.0, false};
}

InequalityReport evaluate(const std::string& id, const TrialSpec& spec,
                          const VerifyContext& ctx) {
  spec.validate();
  InequalityReport rep;
  rep.id = id;
  const bool exact = (id == "CL_ORDER" || id == "SERIES_CONV");
  rep.exact_check = exact;

  int n = spec.n_trials;
  if (id == "APRIORI") n = spec.solver_runs;

  double min_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    TrialRow row;
    if (id == "TRILINEAR") row = check_trilinear(spec, ctx, i, false);
    else if (id == "TRILINEAR_X") row = check_trilinear(spec, ctx, i, true);
    else if (id == "TRILINEAR_P") row = check_trilinear_p(spec, ctx, i);
    else if (id == "NONLIN_ENERGY") row = check_nonlin_energy(spec, ctx, i);
    else if (id == "MOMENT_BOUND") row = check_moment_bound(spec, ctx, i);
    else if (id == "L_UPPER") row = check_l_upper(spec, ctx, i);
    else if (id == "MACRO_DISS") row = check_macro_diss(spec, ctx, i);
    else if (id == "APRIORI") row = check_apriori_run(spec, ctx, i);
    else if (id == "COERCIVITY") row = check_coercivity(spec, ctx, i);
    else if (id == "K_BOUND") row = check_k_bound(spec, ctx, i);
    else if (id == "BLOCK_BOUND") row = check_block_bound(spec, ctx, i);
    else if (id == "BERNSTEIN_EQUIV") row = check_bernstein(spec, ctx, i);
    else if (id == "NH_EMBED") row = check_nh_embed(spec, ctx, i);
    else if (id == "CL_ORDER") row = check_cl_order(spec, ctx, i);
    else if (id == "SERIES_CONV") row = check_series_conv(spec, ctx, i);
    else throw Error("unknown inequality id: " + id);

    if (row.skipped || (row.rhs == 0.0 && row.lhs == 0.0)) {
      row.skipped = true;
      ++rep.skipped;
    } else if (row.rhs == 0.0) {
      rep.hard_violation = true;
      rep.note = "RHS vanished with nonzero LHS";
    } else {
      row.ratio = row.lhs / row.rhs;
      rep.max_ratio = std::max(rep.max_ratio, row.ratio);
      min_ratio = std::min(min_ratio, row.ratio);
      if (exact && row.ratio > 1.0 + 1e-12) rep.exact_pass = false;
    }
    rep.rows.push_back(row);
  }
  rep.min_ratio = std::isfinite(min_ratio) ? min_ratio : 0.0;
  rep.fitted_C = rep.max_ratio;
  if (id == "COERCIVITY" && rep.min_ratio <= 0.0 && rep.skipped < n) {
    rep.hard_violation = true;
    rep.note = "coercivity constant not positive";
  }
  if (rep.skipped == n) rep.note = "all trials degenerate";
  return rep;
}

}  // namespace

InequalityReport run_check(const std::string& id, const TrialSpec& spec,
                           const VerifyContext& ctx, const VerifyContext* refined,
                           int refined_trials) {
  InequalityReport rep = evaluate(id, spec, ctx);
  if (refined && id != "APRIORI") {
    TrialSpec rs = spec;
    rs.n_trials = std::min(spec.n_trials, refined_trials);
    const InequalityReport rr = evaluate(id, rs, *refined);
    // Compare the refined constant against the base constant fitted over the
    // same trial indices: a max over fewer trials is systematically smaller,
    // so a mismatched trial count would masquerade as drift.
    double base_subset = 0.0;
    for (const TrialRow& row : rep.rows)
      if (row.trial < rs.n_trials && !row.skipped)
        base_subset = std::max(base_subset, row.ratio);
    if (base_subset > 0.0 && rr.fitted_C > 0.0)
      rep.refinement_drift = rr.fitted_C / base_subset;
  }
  return rep;
}

SuiteResult full_suite(const TrialSpec& spec, const VerifyContext& ctx,
                       const VerifyContext* refined, int refined_trials) {
  SuiteResult out;
  for (const auto& id : registry_ids()) {
    InequalityReport rep = run_check(id, spec, ctx, refined, refined_trials);
    if (rep.hard_violation || !rep.exact_pass) out.pass = false;
    // A constant that grows past 2x under refinement suggests the estimate
    // does not hold with a resolution-uniform constant; shrinking is benign.
    if (refined && !rep.exact_check && rep.fitted_C > 0.0 && rep.refinement_drift > 2.0)
      out.pass = false;
    out.reports.push_back(std::move(rep));
  }
  return out;
}

RunRatios run_ratios(const VerifyContext& ctx, const SpectralField& f0,
                     const EnergyFunctionals& en) {
  RunRatios rr;
  BesovSpec b0;
  b0.s = 1.5;
  const double f0n = besov_norm(f0, b0, *ctx.dyadic, 2.0, ctx.vgrid.get());
  rr.macro_diss_lhs = en.D_macro;
  rr.macro_diss_rhs = f0n + en.E + en.D_micro + en.E * en.D;
  rr.macro_diss_ratio = rr.macro_diss_rhs > 0.0 ? rr.macro_diss_lhs / rr.macro_diss_rhs : 0.0;
  rr.apriori_lhs = en.E + en.D;
  rr.apriori_rhs = f0n + (std::sqrt(en.E) + en.E) * en.D;
  rr.apriori_ratio = rr.apriori_rhs > 0.0 ? rr.apriori_lhs / rr.apriori_rhs : 0.0;
  return rr;
}

}  // namespace kb
