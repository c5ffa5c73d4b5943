#pragma once

#include <memory>

#include "kineticlab/fourier_grid.hpp"

namespace kb {

// Smooth dyadic partition of unity on the wavenumber lattice and the induced
// frequency-localization operators. The radial cutoff chi equals 1 on
// |k| <= 3/4, vanishes for |k| >= 4/3, and phi(k) = chi(k/2) - chi(k) is
// supported in the shell 3/4 <= |k| <= 8/3; the telescoping construction makes
// chi(k) + sum_q phi(2^{-q} k) = 1 exact up to rounding.
class DyadicSystem {
 public:
  DyadicSystem(std::shared_ptr<const FourierGrid> grid, double transition_sharpness = 1.0);

  double chi(double t) const;
  double phi(double t) const { return chi(0.5 * t) - chi(t); }

  int q_max() const { return q_max_; }
  // Smallest q for which the homogeneous shell meets a nonzero grid mode.
  int hom_q_min() const { return hom_q_min_; }
  const FourierGrid& grid() const { return *grid_; }
  const std::shared_ptr<const FourierGrid>& grid_ptr() const { return grid_; }

  // Nonhomogeneous block: q = -1 applies chi(k), q >= 0 applies phi(2^{-q} k).
  SpectralField block(int q, const SpectralField& f) const;
  // Low-frequency cutoff: sum of blocks j <= q-1 (zero for q = -1).
  SpectralField low_pass(int q, const SpectralField& f) const;
  // Homogeneous block phi(2^{-q} k); the k = 0 mode belongs to no block.
  SpectralField hom_block(int q, const SpectralField& f) const;

  // Bony paraproduct: sum_j S_{j-1} u . Delta_j v, products dealiased.
  SpectralField paraproduct(const SpectralField& u, const SpectralField& v) const;
  // Bony remainder: sum over |j - j'| <= 1 of Delta_j u . Delta_{j'} v.
  SpectralField remainder(const SpectralField& u, const SpectralField& v) const;

  double block_multiplier(int q, double kmag) const;
  double low_pass_multiplier(int q, double kmag) const;

 private:
  std::shared_ptr<const FourierGrid> grid_;
  double sharpness_;
  int q_max_;
  int hom_q_min_;
};

}  // namespace kb
