#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>

#include "kineticlab/fourier_grid.hpp"
#include "kineticlab/sphere.hpp"
#include "kineticlab/velocity_grid.hpp"

namespace kb {

// Hard-potential cutoff kernel |xi - xi_*|^gamma B0(theta) with
// 0 <= gamma <= 1 and 0 <= B0(theta) <= C |cos(theta)|.
struct KernelParams {
  double gamma = 1.0;
  std::function<double(double)> angular_factor;  // B0 as a function of theta
  double bound_constant = 1.0;

  double b0(double theta) const {
    return angular_factor ? angular_factor(theta) : std::abs(std::cos(theta));
  }
};

// Interpolation stencil at an off-grid velocity: 8 lattice corners with
// trilinear weights. Deposits/gathers are Maxwellian-weighted: the stencil
// applies to h/sqrt(mu) and the analytic sqrt(mu) factor at the point is
// carried by the quadrature weight, which keeps equilibrium identities exact.
struct GainStencil {
  int idx[8];
  double wgt[8];
  bool valid;  // false when the point leaves the velocity box (clipped)
};

// Precomputed velocity-space collision machinery for a fixed grid and kernel:
// the collision frequency nu, the dense linearized kernel matrix K (symmetric,
// with the five equilibrium identities K(phi sqrt(mu)) = nu phi sqrt(mu)
// enforced exactly), the loss-weight matrix, and the linearization-defect
// matrix used to keep the nonlinear operator consistent with K.
class CollisionTables {
 public:
  CollisionTables(std::shared_ptr<const VelocityGrid> vgrid,
                  std::shared_ptr<const SphereQuadrature> sph, KernelParams kp,
                  double assembly_prune = 1e-4);

  const VelocityGrid& vgrid() const { return *vgrid_; }
  const std::shared_ptr<const VelocityGrid>& vgrid_ptr() const { return vgrid_; }
  const SphereQuadrature& sphere() const { return *sph_; }
  const KernelParams& kernel() const { return kp_; }

  const Eigen::VectorXd& nu() const { return nu_; }
  const Eigen::MatrixXd& k_matrix() const { return K_; }
  const Eigen::MatrixXd& loss_weights() const { return lossW_; }
  const Eigen::MatrixXd& defect() const { return D_; }

  // Collision frequency at an arbitrary velocity (same quadrature as nu()).
  double nu_at(const Vec3& xi) const;

  // Fraction of gain-quadrature weight clipped at the velocity-box boundary.
  double clipped_fraction() const { return clipped_fraction_; }

  // --- velocity-only applications (one spatial point) ---
  Eigen::VectorXd apply_K(const Eigen::VectorXd& f) const { return K_ * f; }
  Eigen::VectorXd apply_L(const Eigen::VectorXd& f) const {
    return nu_.cwiseProduct(f) - K_ * f;
  }

  struct GammaOptions {
    double prune = 1e-4;                  // sqrt(mu)(xi_*) threshold, relative
    bool consistency_correction = true;   // linearization agreement with K
    bool conservative_projection = true;  // zero the five invariant moments
  };
  Eigen::VectorXd gamma_bilinear(const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                                 const GammaOptions& opt) const;
  Eigen::VectorXd gamma_bilinear(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
    return gamma_bilinear(f, g, GammaOptions{});
  }

  // Nodes with sqrt(mu) above `prune` times its max, cached per threshold.
  const std::vector<int>& pruned_nodes(double prune) const;

  // Stencil for Maxwellian-weighted trilinear interpolation at `p`.
  GainStencil stencil_at(const Vec3& p) const;

  // Gram projection of a velocity vector onto span{sqrt(mu), xi_i sqrt(mu),
  // (|xi|^2-3) sqrt(mu)} removed (returns the microscopic remainder) or the
  // macroscopic component coefficients; used for the conservative correction.
  void remove_invariant_moments(Eigen::VectorXd& f) const;

  // Angular factor value at hemisphere node k under the axis-aligned rule.
  double b0_value(int k) const { return b0_vals_[k]; }
  double angular_total() const { return b_bar_; }  // integral of B0 over the sphere

  const Eigen::MatrixXd& invariant_basis() const { return basis_; }
  const Eigen::MatrixXd& invariant_projector() const { return inv_basis_; }
  const Eigen::VectorXd& sqmu_vector() const { return sqmu_vec_; }

  // Hot quadrature loop shared by the scalar and field-batched nonlinear
  // applications: accumulates the gain integrand for `nx` interleaved spatial
  // samples per velocity node. fs/gs hold f/sqrt(mu) and g/sqrt(mu) in
  // node-major layout; the caller multiplies rows by sqrt(mu)(xi) afterwards.
  template <typename T>
  void gain_kernel(int nx, const T* fs, const T* gs, T* gain, double prune) const;

 private:
  void build();

  std::shared_ptr<const VelocityGrid> vgrid_;
  std::shared_ptr<const SphereQuadrature> sph_;
  KernelParams kp_;
  double assembly_prune_;

  Eigen::VectorXd nu_;
  Eigen::VectorXd sqmu_vec_;
  Eigen::MatrixXd K_, lossW_, D_;
  Eigen::MatrixXd inv_basis_;   // 5 x Nv: Gram-inverse times basis^T (with weight)
  Eigen::MatrixXd basis_;       // Nv x 5: invariant directions
  std::vector<double> b0_vals_;
  double b_bar_ = 0.0;
  double clipped_fraction_ = 0.0;
  mutable std::map<double, std::vector<int>> prune_cache_;
};

// Collision operators lifted to (x, xi) fields: the velocity operator acts at
// each spatial point/mode; linear operators act directly on spectral slices,
// the bilinear operator pointwise in physical x with dealiasing via the
// spectral truncation of the product field.
enum class FieldOp { L, K, NuMult, Gamma };

SpectralField apply_field(const CollisionTables& tables, FieldOp op, const SpectralField& f);
SpectralField apply_field_gamma(const CollisionTables& tables, const SpectralField& f,
                                const SpectralField& g,
                                const CollisionTables::GammaOptions& opt = {});

// Loss part alone: g(x, xi) times the collision-frequency-like multiplier
// generated by f (the loss-weight matrix applied in velocity), dealiased.
// Used by the iteration scheme, where the loss factor couples two iterates.
SpectralField apply_field_loss(const CollisionTables& tables, const SpectralField& f,
                               const SpectralField& g);

}  // namespace kb
