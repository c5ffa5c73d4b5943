#include "kineticlab/collision.hpp"

#include <algorithm>
#include <cmath>

#include "kineticlab/threads.hpp"

namespace kb {

namespace {

// Deterministic orthonormal frame completing dhat; used to place the rotated
// angular nodes around the collision axis.
struct Frame {
  Vec3 t1, t2;
};

Frame frame_for(const Vec3& dhat) {
  int axis = 0;
  double best = std::abs(dhat[0]);
  for (int a = 1; a < 3; ++a)
    if (std::abs(dhat[a]) < best) {
      best = std::abs(dhat[a]);
      axis = a;
    }
  Vec3 e{0.0, 0.0, 0.0};
  e[axis] = 1.0;
  Vec3 t1{dhat[1] * e[2] - dhat[2] * e[1], dhat[2] * e[0] - dhat[0] * e[2],
          dhat[0] * e[1] - dhat[1] * e[0]};
  const double n = std::sqrt(norm2(t1));
  t1 = {t1[0] / n, t1[1] / n, t1[2] / n};
  Vec3 t2{dhat[1] * t1[2] - dhat[2] * t1[1], dhat[2] * t1[0] - dhat[0] * t1[2],
          dhat[0] * t1[1] - dhat[1] * t1[0]};
  return {t1, t2};
}

double pow_gamma(double dn, double gamma) {
  if (dn > 0.0) return gamma == 1.0 ? dn : (gamma == 0.0 ? 1.0 : std::pow(dn, gamma));
  return gamma == 0.0 ? 1.0 : 0.0;
}

}  // namespace

CollisionTables::CollisionTables(std::shared_ptr<const VelocityGrid> vgrid,
                                 std::shared_ptr<const SphereQuadrature> sph,
                                 KernelParams kp, double assembly_prune)
    : vgrid_(std::move(vgrid)), sph_(std::move(sph)), kp_(std::move(kp)),
      assembly_prune_(assembly_prune) {
  require(kp_.gamma >= 0.0 && kp_.gamma <= 1.0, "gamma must be in [0,1]");
  // Sample the angular-factor bound 0 <= B0 <= C |cos theta|.
  for (int s = 0; s <= 64; ++s) {
    const double theta = kPi * s / 64.0;
    const double b = kp_.b0(theta);
    require(b >= 0.0 && b <= kp_.bound_constant * std::abs(std::cos(theta)) + 1e-12,
            "angular factor violates the cutoff bound");
  }
  build();
}

const std::vector<int>& CollisionTables::pruned_nodes(double prune) const {
  auto it = prune_cache_.find(prune);
  if (it != prune_cache_.end()) return it->second;
  const int nv = vgrid_->size();
  double maxs = 0.0;
  for (int i = 0; i < nv; ++i) maxs = std::max(maxs, vgrid_->sqmu(i));
  std::vector<int> keep;
  for (int i = 0; i < nv; ++i)
    if (vgrid_->sqmu(i) >= prune * maxs) keep.push_back(i);
  return prune_cache_.emplace(prune, std::move(keep)).first->second;
}

GainStencil CollisionTables::stencil_at(const Vec3& p) const {
  const int n = vgrid_->points_per_axis();
  const double r = vgrid_->half_width();
  const double h = vgrid_->spacing();
  GainStencil st;
  st.valid = true;
  int i0[3];
  double fr[3];
  for (int a = 0; a < 3; ++a) {
    const double fi = (p[a] + r) / h - 0.5;
    const double fl = std::floor(fi);
    i0[a] = static_cast<int>(fl);
    fr[a] = fi - fl;
    if (i0[a] < 0 || i0[a] > n - 2) st.valid = false;
  }
  if (!st.valid) {
    for (int c = 0; c < 8; ++c) {
      st.idx[c] = 0;
      st.wgt[c] = 0.0;
    }
    return st;
  }
  int c = 0;
  for (int dx = 0; dx < 2; ++dx)
    for (int dy = 0; dy < 2; ++dy)
      for (int dz = 0; dz < 2; ++dz, ++c) {
        st.idx[c] = ((i0[0] + dx) * n + (i0[1] + dy)) * n + (i0[2] + dz);
        st.wgt[c] = (dx ? fr[0] : 1.0 - fr[0]) * (dy ? fr[1] : 1.0 - fr[1]) *
                    (dz ? fr[2] : 1.0 - fr[2]);
      }
  return st;
}

double CollisionTables::nu_at(const Vec3& xi) const {
  const int nv = vgrid_->size();
  double acc = 0.0;
  for (int j = 0; j < nv; ++j) {
    const Vec3& xj = vgrid_->node(j);
    const Vec3 d{xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]};
    acc += vgrid_->mu(j) * pow_gamma(std::sqrt(norm2(d)), kp_.gamma);
  }
  return b_bar_ * vgrid_->weight() * acc;
}

void CollisionTables::build() {
  const int nv = vgrid_->size();
  const int m = sph_->hemisphere_size();
  const double w = vgrid_->weight();
  const double hw = sph_->hemisphere_weight();

  // Angular values under the axis-aligned rule: node k sits at polar angle
  // theta_k from the collision direction; its antipode at pi - theta_k maps to
  // the same post-collision pair, so the pair average is used with the
  // doubled hemisphere weight.
  b0_vals_.resize(m);
  b_bar_ = 0.0;
  for (int k = 0; k < m; ++k) {
    const double theta = std::acos(sph_->polar_cos(k));
    b0_vals_[k] = 0.5 * (kp_.b0(theta) + kp_.b0(kPi - theta));
    b_bar_ += hw * b0_vals_[k];
  }

  sqmu_vec_.resize(nv);
  for (int i = 0; i < nv; ++i) sqmu_vec_[i] = vgrid_->sqmu(i);

  nu_.resize(nv);
  parallel_for(nv, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) nu_[i] = nu_at(vgrid_->node(i));
  });

  // Loss weights: lossW[i][j] = w * Bbar * |xi_i - xi_j|^gamma * sqmu_j.
  lossW_.resize(nv, nv);
  parallel_for(nv, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec3& xi = vgrid_->node(i);
      for (int j = 0; j < nv; ++j) {
        const Vec3& xj = vgrid_->node(j);
        const Vec3 d{xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]};
        lossW_(i, j) = w * b_bar_ * pow_gamma(std::sqrt(norm2(d)), kp_.gamma) *
                       vgrid_->sqmu(j);
      }
    }
  });

  // Gain part assembled by scattering interpolation stencils at the
  // post-collision velocities; Maxwellian-weighted deposits keep the
  // equilibrium row identity exact up to boundary clipping.
  const auto& keep = pruned_nodes(assembly_prune_);
  Eigen::MatrixXd k2 = Eigen::MatrixXd::Zero(nv, nv);
  std::vector<double> clipped(nv, 0.0), total(nv, 0.0);
  std::vector<double> rc(m), cph(m), sph_az(m);
  for (int k = 0; k < m; ++k) {
    rc[k] = std::sqrt(1.0 - sph_->polar_cos(k) * sph_->polar_cos(k));
    cph[k] = std::cos(sph_->azimuth(k));
    sph_az[k] = std::sin(sph_->azimuth(k));
  }
  parallel_for(nv, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec3& xi = vgrid_->node(i);
      for (int j : keep) {
        const Vec3& xj = vgrid_->node(j);
        const Vec3 d{xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]};
        const double dn2 = norm2(d);
        if (dn2 == 0.0) continue;
        const double dn = std::sqrt(dn2);
        const Vec3 dhat{d[0] / dn, d[1] / dn, d[2] / dn};
        const Frame fr = frame_for(dhat);
        const double base = w * hw * pow_gamma(dn, kp_.gamma) * vgrid_->sqmu(j);
        // pref * stencil is the deposit; sqmu(xi') sqmu(xi'_*) collapses to
        // sqmu_i sqmu_j by energy conservation.
        const double pair = vgrid_->sqmu(i) * vgrid_->sqmu(j);
        for (int k = 0; k < m; ++k) {
          const double z = sph_->polar_cos(k);
          const Vec3 om{z * dhat[0] + rc[k] * (cph[k] * fr.t1[0] + sph_az[k] * fr.t2[0]),
                        z * dhat[1] + rc[k] * (cph[k] * fr.t1[1] + sph_az[k] * fr.t2[1]),
                        z * dhat[2] + rc[k] * (cph[k] * fr.t1[2] + sph_az[k] * fr.t2[2])};
          const double t = dn * z;
          const Vec3 xp{xi[0] - t * om[0], xi[1] - t * om[1], xi[2] - t * om[2]};
          const Vec3 xsp{xj[0] + t * om[0], xj[1] + t * om[1], xj[2] + t * om[2]};
          const double wt = base * b0_vals_[k];
          total[i] += wt;
          const GainStencil sa = stencil_at(xp);
          const GainStencil sb = stencil_at(xsp);
          if (!sa.valid || !sb.valid) {
            clipped[i] += wt;
            continue;
          }
          const double pref = wt * pair;
          for (int c = 0; c < 8; ++c) {
            k2(i, sa.idx[c]) += pref * sa.wgt[c] / vgrid_->sqmu(sa.idx[c]);
            k2(i, sb.idx[c]) += pref * sb.wgt[c] / vgrid_->sqmu(sb.idx[c]);
          }
        }
      }
    }
  });
  double ctot = 0.0, ttot = 0.0;
  for (int i = 0; i < nv; ++i) {
    ctot += clipped[i];
    ttot += total[i];
  }
  clipped_fraction_ = ttot > 0 ? ctot / ttot : 0.0;

  Eigen::MatrixXd kraw = k2 - sqmu_vec_.asDiagonal() * lossW_;
  Eigen::MatrixXd ksym = 0.5 * (kraw + kraw.transpose());

  // Invariant directions phi sqrt(mu), phi in {1, xi_1, xi_2, xi_3, |xi|^2}.
  basis_.resize(nv, 5);
  for (int i = 0; i < nv; ++i) {
    const Vec3& x = vgrid_->node(i);
    const double s = vgrid_->sqmu(i);
    basis_(i, 0) = s;
    basis_(i, 1) = x[0] * s;
    basis_(i, 2) = x[1] * s;
    basis_(i, 3) = x[2] * s;
    basis_(i, 4) = norm2(x) * s;
  }
  const Eigen::MatrixXd gram_inv = (basis_.transpose() * basis_).inverse();
  inv_basis_ = gram_inv * basis_.transpose();

  // Minimal symmetric update enforcing K (phi sqrt(mu)) = nu phi sqrt(mu)
  // exactly on the five invariant directions.
  const Eigen::MatrixXd want = nu_.asDiagonal() * basis_;
  const Eigen::MatrixXd resid = want - ksym * basis_;
  const Eigen::MatrixXd rm = resid * gram_inv;
  K_ = ksym + rm * basis_.transpose() + basis_ * rm.transpose() -
       basis_ * gram_inv * (basis_.transpose() * resid) * gram_inv * basis_.transpose();
  D_ = K_ - kraw;
}

void CollisionTables::remove_invariant_moments(Eigen::VectorXd& f) const {
  f -= basis_ * (inv_basis_ * f);
}

Eigen::VectorXd CollisionTables::gamma_bilinear(const Eigen::VectorXd& f,
                                                const Eigen::VectorXd& g,
                                                const GammaOptions& opt) const {
  const int nv = vgrid_->size();
  require(f.size() == nv && g.size() == nv, "velocity vector size mismatch");
  Eigen::VectorXd fs(nv), gs(nv);
  for (int i = 0; i < nv; ++i) {
    fs[i] = f[i] / vgrid_->sqmu(i);
    gs[i] = g[i] / vgrid_->sqmu(i);
  }
  Eigen::VectorXd gain = Eigen::VectorXd::Zero(nv);
  gain_kernel<double>(1, fs.data(), gs.data(), gain.data(), opt.prune);
  for (int i = 0; i < nv; ++i) gain[i] *= vgrid_->sqmu(i);

  Eigen::VectorXd out = gain - g.cwiseProduct(lossW_ * f);
  if (opt.consistency_correction) {
    const auto& sq = sqmu_vec_;
    const double s2 = sq.squaredNorm();
    const double af = f.dot(sq) / s2;
    const double ag = g.dot(sq) / s2;
    out += 0.5 * (ag * (D_ * f) + af * (D_ * g));
  }
  if (opt.conservative_projection) remove_invariant_moments(out);
  return out;
}

template <typename T>
void CollisionTables::gain_kernel(int nx, const T* fs, const T* gs, T* gain,
                                  double prune) const {
  const int m = sph_->hemisphere_size();
  const double w = vgrid_->weight();
  const double hw = sph_->hemisphere_weight();
  const auto& keep = pruned_nodes(prune);
  const int nv = vgrid_->size();
  std::vector<double> rc(m), cph(m), saz(m);
  for (int k = 0; k < m; ++k) {
    rc[k] = std::sqrt(1.0 - sph_->polar_cos(k) * sph_->polar_cos(k));
    cph[k] = std::cos(sph_->azimuth(k));
    saz[k] = std::sin(sph_->azimuth(k));
  }

  parallel_for(nv, [&](std::size_t lo, std::size_t hi) {
    std::vector<T> acc_f(nx), acc_g(nx);
    for (std::size_t i = lo; i < hi; ++i) {
      T* out = gain + i * static_cast<std::size_t>(nx);
      const Vec3& xi = vgrid_->node(i);
      for (int j : keep) {
        const Vec3& xj = vgrid_->node(j);
        const Vec3 d{xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]};
        const double dn2 = norm2(d);
        if (dn2 == 0.0) continue;
        const double dn = std::sqrt(dn2);
        const Vec3 dhat{d[0] / dn, d[1] / dn, d[2] / dn};
        const Frame fr = frame_for(dhat);
        const double base = w * hw * pow_gamma(dn, kp_.gamma) * vgrid_->mu(j);
        for (int k = 0; k < m; ++k) {
          const double z = sph_->polar_cos(k);
          const Vec3 om{z * dhat[0] + rc[k] * (cph[k] * fr.t1[0] + saz[k] * fr.t2[0]),
                        z * dhat[1] + rc[k] * (cph[k] * fr.t1[1] + saz[k] * fr.t2[1]),
                        z * dhat[2] + rc[k] * (cph[k] * fr.t1[2] + saz[k] * fr.t2[2])};
          const double t = dn * z;
          const GainStencil sa = stencil_at(
              {xi[0] - t * om[0], xi[1] - t * om[1], xi[2] - t * om[2]});
          if (!sa.valid) continue;
          const GainStencil sb = stencil_at(
              {xj[0] + t * om[0], xj[1] + t * om[1], xj[2] + t * om[2]});
          if (!sb.valid) continue;
          const T wt = static_cast<T>(base * b0_vals_[k]);
          // Interpolate f/sqrt(mu) at xi'_* and g/sqrt(mu) at xi'.
          {
            const T* r0 = fs + sb.idx[0] * static_cast<std::size_t>(nx);
            const T w0 = static_cast<T>(sb.wgt[0]);
            for (int x = 0; x < nx; ++x) acc_f[x] = w0 * r0[x];
            for (int c = 1; c < 8; ++c) {
              const T* r = fs + sb.idx[c] * static_cast<std::size_t>(nx);
              const T wc = static_cast<T>(sb.wgt[c]);
              for (int x = 0; x < nx; ++x) acc_f[x] += wc * r[x];
            }
          }
          {
            const T* r0 = gs + sa.idx[0] * static_cast<std::size_t>(nx);
            const T w0 = static_cast<T>(sa.wgt[0]);
            for (int x = 0; x < nx; ++x) acc_g[x] = w0 * r0[x];
            for (int c = 1; c < 8; ++c) {
              const T* r = gs + sa.idx[c] * static_cast<std::size_t>(nx);
              const T wc = static_cast<T>(sa.wgt[c]);
              for (int x = 0; x < nx; ++x) acc_g[x] += wc * r[x];
            }
          }
          for (int x = 0; x < nx; ++x) out[x] += wt * acc_f[x] * acc_g[x];
        }
      }
    }
  });
}

template void CollisionTables::gain_kernel<double>(int, const double*, const double*,
                                                   double*, double) const;
template void CollisionTables::gain_kernel<float>(int, const float*, const float*,
                                                  float*, double) const;

SpectralField apply_field(const CollisionTables& tables, FieldOp op, const SpectralField& f) {
  const int nv = tables.vgrid().size();
  require(f.n_slices() == nv, "snapshot velocity count does not match tables");
  const int total = f.grid().total_points();
  SpectralField out(f.grid_ptr(), nv, f.parity_tag());

  using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajorMat> in(reinterpret_cast<const double*>(f.values().data()), nv,
                                   2 * total);
  Eigen::Map<RowMajorMat> res(reinterpret_cast<double*>(out.values().data()), nv, 2 * total);

  switch (op) {
    case FieldOp::K:
      res.noalias() = tables.k_matrix() * in;
      break;
    case FieldOp::L:
      res.noalias() = -(tables.k_matrix() * in);
      res += tables.nu().asDiagonal() * in;
      break;
    case FieldOp::NuMult:
      res.noalias() = tables.nu().asDiagonal() * in;
      break;
    case FieldOp::Gamma:
      throw Error("use apply_field_gamma for the bilinear operator");
  }
  return out;
}

SpectralField apply_field_gamma(const CollisionTables& tables, const SpectralField& f,
                                const SpectralField& g,
                                const CollisionTables::GammaOptions& opt) {
  const int nv = tables.vgrid().size();
  require(f.n_slices() == nv && g.n_slices() == nv, "snapshot velocity count mismatch");
  require(f.grid() == g.grid(), "grid mismatch");
  const FourierGrid& grid = f.grid();
  const int px = grid.padded_total();

  // Pointwise products evaluated on the 3/2 padded physical grid (dealiased).
  using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajorMat fphys(nv, px), gphys(nv, px);
  std::vector<float> fsc(static_cast<std::size_t>(nv) * px),
      gsc(static_cast<std::size_t>(nv) * px);
  {
    std::vector<cplx> buf(px);
    for (int s = 0; s < nv; ++s) {
      const double inv_sq = 1.0 / tables.vgrid().sqmu(s);
      grid.to_physical_padded(f.slice(s), buf);
      for (int x = 0; x < px; ++x) {
        fphys(s, x) = buf[x].real();
        fsc[s * static_cast<std::size_t>(px) + x] = static_cast<float>(buf[x].real() * inv_sq);
      }
      grid.to_physical_padded(g.slice(s), buf);
      for (int x = 0; x < px; ++x) {
        gphys(s, x) = buf[x].real();
        gsc[s * static_cast<std::size_t>(px) + x] = static_cast<float>(buf[x].real() * inv_sq);
      }
    }
  }

  std::vector<float> gain(static_cast<std::size_t>(nv) * px, 0.0f);
  tables.gain_kernel<float>(px, fsc.data(), gsc.data(), gain.data(), opt.prune);

  RowMajorMat result(nv, px);
  const Eigen::MatrixXd lossF = tables.loss_weights() * fphys;
  for (int i = 0; i < nv; ++i) {
    const double sq = tables.vgrid().sqmu(i);
    for (int x = 0; x < px; ++x)
      result(i, x) = sq * gain[i * static_cast<std::size_t>(px) + x] - gphys(i, x) * lossF(i, x);
  }

  if (opt.consistency_correction) {
    const Eigen::VectorXd& sq = tables.sqmu_vector();
    const double s2 = sq.squaredNorm();
    const Eigen::RowVectorXd af = (sq.transpose() * fphys) / s2;
    const Eigen::RowVectorXd ag = (sq.transpose() * gphys) / s2;
    const RowMajorMat df = tables.defect() * fphys;
    const RowMajorMat dg = tables.defect() * gphys;
    for (int i = 0; i < nv; ++i)
      for (int x = 0; x < px; ++x)
        result(i, x) += 0.5 * (ag(x) * df(i, x) + af(x) * dg(i, x));
  }
  if (opt.conservative_projection) {
    const Eigen::MatrixXd coeff = tables.invariant_projector() * result;
    result.noalias() -= tables.invariant_basis() * coeff;
  }

  SpectralField out(f.grid_ptr(), nv, f.parity_tag() && g.parity_tag());
  std::vector<cplx> pbuf(px);
  for (int s = 0; s < nv; ++s) {
    for (int x = 0; x < px; ++x) pbuf[x] = result(s, x);
    grid.from_physical_padded(pbuf, out.slice(s));
  }
  return out;
}

SpectralField apply_field_loss(const CollisionTables& tables, const SpectralField& f,
                               const SpectralField& g) {
  const int nv = tables.vgrid().size();
  require(f.n_slices() == nv && g.n_slices() == nv, "snapshot velocity count mismatch");
  require(f.grid() == g.grid(), "grid mismatch");
  const FourierGrid& grid = f.grid();
  const int px = grid.padded_total();

  using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajorMat fphys(nv, px), gphys(nv, px);
  std::vector<cplx> buf(px);
  for (int s = 0; s < nv; ++s) {
    grid.to_physical_padded(f.slice(s), buf);
    for (int x = 0; x < px; ++x) fphys(s, x) = buf[x].real();
    grid.to_physical_padded(g.slice(s), buf);
    for (int x = 0; x < px; ++x) gphys(s, x) = buf[x].real();
  }

  const Eigen::MatrixXd lossF = tables.loss_weights() * fphys;
  SpectralField out(f.grid_ptr(), nv, f.parity_tag() && g.parity_tag());
  for (int s = 0; s < nv; ++s) {
    for (int x = 0; x < px; ++x) buf[x] = gphys(s, x) * lossF(s, x);
    grid.from_physical_padded(buf, out.slice(s));
  }
  return out;
}

}  // namespace kb
