#include "kineticlab/macro.hpp"

#include <cmath>

namespace kb {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> as_real(const SpectralField& f) {
  return {reinterpret_cast<const double*>(f.values().data()), f.n_slices(),
          2L * f.grid().total_points()};
}

Eigen::Map<RowMat> as_real(SpectralField& f) {
  return {reinterpret_cast<double*>(f.values().data()), f.n_slices(),
          2L * f.grid().total_points()};
}

double domain_volume(const FourierGrid& g) {
  return g.total_points() * g.cell_volume();
}

// (u, v)_{L^2_x} for real fields via Parseval: L^d sum_k u_k conj(v_k).
double l2x_inner(const FourierGrid& g, std::span<const cplx> u, std::span<const cplx> v) {
  double s = 0.0;
  for (int k = 0; k < g.total_points(); ++k)
    s += u[k].real() * v[k].real() + u[k].imag() * v[k].imag();
  return s * domain_volume(g);
}

double l2x_norm_sq(const FourierGrid& g, std::span<const cplx> u) {
  double s = 0.0;
  for (int k = 0; k < g.total_points(); ++k) s += std::norm(u[k]);
  return s * domain_volume(g);
}

// Spectral partial derivative along `axis`: multiply by i k_axis.
std::vector<cplx> deriv_slice(const FourierGrid& g, std::span<const cplx> u, int axis) {
  std::vector<cplx> out(g.total_points());
  for (int k = 0; k < g.total_points(); ++k)
    out[k] = cplx{0.0, g.kvec(k)[axis]} * u[k];
  return out;
}

// Derivative weights of the quadratic through (t0,t1,t2), evaluated at te.
std::array<double, 3> lagrange_deriv_weights(double t0, double t1, double t2, double te) {
  return {(2.0 * te - t1 - t2) / ((t0 - t1) * (t0 - t2)),
          (2.0 * te - t0 - t2) / ((t1 - t0) * (t1 - t2)),
          (2.0 * te - t0 - t1) / ((t2 - t0) * (t2 - t1))};
}

}  // namespace

MacroProjector::MacroProjector(std::shared_ptr<const VelocityGrid> vgrid)
    : vgrid_(std::move(vgrid)) {
  const int nv = vgrid_->size();
  const double w = vgrid_->weight();

  basis_.resize(nv, 5);
  moment_rows_.resize(12, nv);
  for (int v = 0; v < nv; ++v) {
    const Vec3& xi = vgrid_->node(v);
    const double sq = vgrid_->sqmu(v);
    const double r2 = norm2(xi);
    basis_(v, 0) = sq;
    for (int a = 0; a < 3; ++a) basis_(v, 1 + a) = xi[a] * sq;
    basis_(v, 4) = (r2 - 3.0) * sq;
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < 3; ++m)
        moment_rows_(3 * i + m, v) = w * (xi[i] * xi[m] - (i == m ? 1.0 : 0.0)) * sq;
    for (int i = 0; i < 3; ++i)
      moment_rows_(9 + i, v) = w * 0.1 * (r2 - 5.0) * xi[i] * sq;
  }

  const Eigen::MatrixXd gram = w * basis_.transpose() * basis_;
  proj_ = gram.ldlt().solve(w * basis_.transpose());
}

MacroDecomposition MacroProjector::project(const SpectralField& f) const {
  const int nv = vgrid_->size();
  require(f.n_slices() == nv, "snapshot velocity count mismatch");
  const auto& gp = f.grid_ptr();
  const bool par = f.parity_tag();

  const RowMat coeff = proj_ * as_real(f);  // 5 x 2*total

  MacroDecomposition d{{SpectralField(gp, 1, par), SpectralField(gp, 3, par),
                        SpectralField(gp, 1, par)},
                       SpectralField(gp, nv, par), f};
  as_real(d.coeffs.a) = coeff.row(0);
  as_real(d.coeffs.b) = coeff.middleRows(1, 3);
  as_real(d.coeffs.c) = coeff.row(4);
  as_real(d.pf) = basis_ * coeff;
  as_real(d.micro) -= as_real(d.pf);
  return d;
}

MomentSet MacroProjector::moments(const SpectralField& f) const {
  require(f.n_slices() == vgrid_->size(), "snapshot velocity count mismatch");
  const auto& gp = f.grid_ptr();
  const bool par = f.parity_tag();

  const RowMat mom = moment_rows_ * as_real(f);  // 12 x 2*total
  MomentSet ms{SpectralField(gp, 9, par), SpectralField(gp, 3, par)};
  as_real(ms.theta) = mom.topRows(9);
  as_real(ms.lambda) = mom.bottomRows(3);
  return ms;
}

double MacroProjector::interactive_functional(const SpectralField& f, int q,
                                              const DyadicSystem& dyadic,
                                              const InteractiveParams& params) const {
  params.validate();
  require(&dyadic.grid() == &f.grid() || dyadic.grid() == f.grid(), "grid mismatch");
  const FourierGrid& g = f.grid();

  const SpectralField fq = dyadic.block(q, f);
  const MacroDecomposition dec = project(fq);
  const MomentSet ms = moments(dec.micro);

  double term1 = 0.0, term2 = 0.0, term3 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const auto dic = deriv_slice(g, dec.coeffs.c.slice(0), i);
    term1 += l2x_inner(g, dic, ms.lambda.slice(i));
  }
  for (int i = 0; i < 3; ++i) {
    for (int m = 0; m < 3; ++m) {
      auto sym = deriv_slice(g, dec.coeffs.b.slice(m), i);
      const auto dmb = deriv_slice(g, dec.coeffs.b.slice(i), m);
      for (int k = 0; k < g.total_points(); ++k) sym[k] += dmb[k];
      term2 += l2x_inner(g, sym, ms.theta.slice(3 * i + m));
    }
  }
  for (int i = 0; i < 3; ++i) {
    const auto dia = deriv_slice(g, dec.coeffs.a.slice(0), i);
    term3 += l2x_inner(g, dia, dec.coeffs.b.slice(i));
  }
  return term1 + params.kappa1 * term2 + params.kappa2 * term3;
}

FluidResidual MacroProjector::fluid_residual(const DistributionTrajectory& traj,
                                             const CollisionTables& tables,
                                             int time_stride) const {
  traj.validate();
  require(traj.size() >= 3, "need at least 3 snapshots for time differencing");
  require(*traj.vgrid == *vgrid_ && tables.vgrid() == *vgrid_, "velocity grid mismatch");
  require(time_stride >= 1, "time_stride must be >= 1");
  const int nt = traj.size();
  const FourierGrid& g = traj.snapshots.front().grid();
  const int total = g.total_points();

  // Per-snapshot spatial fields entering time derivatives, 17 slices each:
  // 0 a, 1-3 b, 4 c, 5-13 Theta({I-P}f), 14-16 Lambda({I-P}f).
  std::vector<SpectralField> hist;
  hist.reserve(nt);
  for (int s = 0; s < nt; ++s) {
    const MacroDecomposition dec = project(traj.snapshots[s]);
    const MomentSet ms = moments(dec.micro);
    SpectralField h(traj.snapshots[s].grid_ptr(), 17);
    as_real(h).row(0) = as_real(dec.coeffs.a);
    as_real(h).middleRows(1, 3) = as_real(dec.coeffs.b);
    as_real(h).row(4) = as_real(dec.coeffs.c);
    as_real(h).middleRows(5, 9) = as_real(ms.theta);
    as_real(h).middleRows(14, 3) = as_real(ms.lambda);
    hist.push_back(std::move(h));
  }

  std::vector<int> eval;
  for (int s = 0; s < nt; s += time_stride) eval.push_back(s);
  if (eval.back() != nt - 1) eval.push_back(nt - 1);

  FluidResidual out;
  for (int s : eval) {
    const int s0 = std::min(std::max(s - 1, 0), nt - 3);
    const auto wts = lagrange_deriv_weights(traj.times[s0], traj.times[s0 + 1],
                                            traj.times[s0 + 2], traj.times[s]);
    auto ddt = [&](int sl) {
      std::vector<cplx> d(total);
      for (int k = 0; k < total; ++k)
        d[k] = wts[0] * hist[s0].slice(sl)[k] + wts[1] * hist[s0 + 1].slice(sl)[k] +
               wts[2] * hist[s0 + 2].slice(sl)[k];
      return d;
    };
    const SpectralField& cur = hist[s];

    // Transport and collision sources for the two high-order equations:
    // moments of -xi . grad_x {I-P}f - L{I-P}f + Gamma(f,f).
    const MacroDecomposition dec = project(traj.snapshots[s]);
    SpectralField src = dec.micro;
    for (int v = 0; v < vgrid_->size(); ++v) {
      const Vec3& xi = vgrid_->node(v);
      auto sl = src.slice(v);
      const auto mic = dec.micro.slice(v);
      for (int k = 0; k < total; ++k) {
        const auto& kv = g.kvec(k);
        sl[k] = cplx{0.0, -(kv[0] * xi[0] + kv[1] * xi[1] + kv[2] * xi[2])} * mic[k];
      }
    }
    src -= apply_field(tables, FieldOp::L, dec.micro);
    src += apply_field_gamma(tables, traj.snapshots[s], traj.snapshots[s]);
    const MomentSet ms_src = moments(src);

    std::array<double, 5> res{};

    // Continuity: d_t a + div b.
    {
      auto r = ddt(0);
      for (int i = 0; i < 3; ++i) {
        const auto d = deriv_slice(g, cur.slice(1 + i), i);
        for (int k = 0; k < total; ++k) r[k] += d[k];
      }
      res[0] = l2x_norm_sq(g, r);
    }
    // Momentum: d_t b_i + d_i (a + 2c) + sum_m d_m Theta_im({I-P}f).
    for (int i = 0; i < 3; ++i) {
      auto r = ddt(1 + i);
      std::vector<cplx> a2c(total);
      for (int k = 0; k < total; ++k) a2c[k] = cur.slice(0)[k] + 2.0 * cur.slice(4)[k];
      const auto dia = deriv_slice(g, a2c, i);
      for (int k = 0; k < total; ++k) r[k] += dia[k];
      for (int m = 0; m < 3; ++m) {
        const auto d = deriv_slice(g, cur.slice(5 + 3 * i + m), m);
        for (int k = 0; k < total; ++k) r[k] += d[k];
      }
      res[1] += l2x_norm_sq(g, r);
    }
    // Energy: d_t c + (1/3) div b + (1/6) div Lambda({I-P}f).
    {
      auto r = ddt(4);
      for (int i = 0; i < 3; ++i) {
        const auto db = deriv_slice(g, cur.slice(1 + i), i);
        const auto dl = deriv_slice(g, cur.slice(14 + i), i);
        for (int k = 0; k < total; ++k) r[k] += db[k] / 3.0 + dl[k] / 6.0;
      }
      res[2] = l2x_norm_sq(g, r);
    }
    // High-order stress: d_t [Theta_im + 2c delta_im] + d_i b_m + d_m b_i = source.
    for (int i = 0; i < 3; ++i) {
      for (int m = 0; m < 3; ++m) {
        auto r = ddt(5 + 3 * i + m);
        if (i == m) {
          const auto dc = ddt(4);
          for (int k = 0; k < total; ++k) r[k] += 2.0 * dc[k];
        }
        const auto dib = deriv_slice(g, cur.slice(1 + m), i);
        const auto dmb = deriv_slice(g, cur.slice(1 + i), m);
        const auto srcsl = ms_src.theta.slice(3 * i + m);
        for (int k = 0; k < total; ++k) r[k] += dib[k] + dmb[k] - srcsl[k];
        res[3] += l2x_norm_sq(g, r);
      }
    }
    // High-order flux: d_t Lambda_i + d_i c = source.
    for (int i = 0; i < 3; ++i) {
      auto r = ddt(14 + i);
      const auto dc = deriv_slice(g, cur.slice(4), i);
      const auto srcsl = ms_src.lambda.slice(i);
      for (int k = 0; k < total; ++k) r[k] += dc[k] - srcsl[k];
      res[4] += l2x_norm_sq(g, r);
    }

    for (auto& v : res) v = std::sqrt(v);
    out.eval_times.push_back(traj.times[s]);
    out.per_time.push_back(res);
    for (int e = 0; e < 5; ++e) out.max_residual[e] = std::max(out.max_residual[e], res[e]);
  }
  return out;
}

}  // namespace kb
