#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "kineticlab/common.hpp"

namespace kb {

// Periodic spatial grid (torus of period domain_length per axis) together with
// its integer wavenumber lattice in FFTW layout. Fourier transforms act on the
// x variable only. The Nyquist row -N/2 has no conjugate partner on the grid
// and is always zeroed so derivatives and real-field parity are unambiguous.
class FourierGrid {
 public:
  FourierGrid(int spatial_dim, int points_per_axis, double domain_length = 2.0 * kPi);

  int spatial_dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  double domain_length() const { return length_; }
  int total_points() const { return total_; }
  double cell_volume() const;  // dx^dim, for L^p integrals

  // Physical wavenumber magnitude |k| of a flat spectral index.
  double kmag(int flat) const { return kmag_[flat]; }
  // Physical wavenumber vector (only the first spatial_dim entries are used).
  const std::array<double, 3>& kvec(int flat) const { return kvec_[flat]; }
  bool is_nyquist(int flat) const { return nyquist_[flat] != 0; }
  // Flat index of the spectral conjugate mode -k (Nyquist maps to itself).
  int conj_index(int flat) const { return conj_[flat]; }
  double max_kmag() const { return max_kmag_; }

  bool operator==(const FourierGrid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && length_ == o.length_;
  }

  // --- transforms (slice = one x-field of total_points() values) ---
  // Spectral coefficients are of the expansion f(x) = sum_k fhat(k) e^{i k.x}.
  void to_physical(std::span<const cplx> spectral, std::span<cplx> physical) const;
  void to_spectral(std::span<const cplx> physical, std::span<cplx> spectral) const;

  // Pointwise product of two spectral slices with 3/2 zero-padding dealiasing.
  void multiply_dealiased(std::span<const cplx> u, std::span<const cplx> v,
                          std::span<cplx> out) const;

  // 3/2 zero-padded physical grid, for dealiased pointwise nonlinearities.
  int padded_axis() const { return 3 * n_ / 2; }
  int padded_total() const;
  void to_physical_padded(std::span<const cplx> spectral, std::span<cplx> physical) const;
  void from_physical_padded(std::span<const cplx> physical, std::span<cplx> spectral) const;

  void zero_nyquist(std::span<cplx> spectral) const;

 private:
  int dim_, n_, total_;
  double length_;
  double max_kmag_;
  std::vector<double> kmag_;
  std::vector<std::array<double, 3>> kvec_;
  std::vector<uint8_t> nyquist_;
  std::vector<int> conj_;
};

// A complex field over (velocity-slot, spatial mode). n_slices is the number
// of velocity values carried (1 for plain spatial fields); the memory layout
// is slice-major with the spatial index fastest, so per-slice transforms and
// the collision kernels both run on contiguous memory.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(std::shared_ptr<const FourierGrid> grid, int n_slices, bool parity_tag = false);

  const FourierGrid& grid() const { return *grid_; }
  const std::shared_ptr<const FourierGrid>& grid_ptr() const { return grid_; }
  int n_slices() const { return n_slices_; }
  bool parity_tag() const { return parity_; }
  void set_parity_tag(bool p) { parity_ = p; }

  std::span<cplx> slice(int s) {
    return {values_.data() + static_cast<std::size_t>(s) * grid_->total_points(),
            static_cast<std::size_t>(grid_->total_points())};
  }
  std::span<const cplx> slice(int s) const {
    return {values_.data() + static_cast<std::size_t>(s) * grid_->total_points(),
            static_cast<std::size_t>(grid_->total_points())};
  }
  std::vector<cplx>& values() { return values_; }
  const std::vector<cplx>& values() const { return values_; }

  // Max deviation from Hermitian symmetry fhat(-k) = conj(fhat(k)).
  double parity_error() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a);

 private:
  std::shared_ptr<const FourierGrid> grid_;
  int n_slices_ = 0;
  bool parity_ = false;
  std::vector<cplx> values_;
};

}  // namespace kb
