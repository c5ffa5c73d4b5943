#include "kineticlab/fourier_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

namespace kb {

namespace {

// FFTW plans cached per (dim, n). Planning is serialized; execution via
// fftw_execute_dft on caller-owned arrays is thread-safe.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

PlanPair& plans_for(int dim, int n) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(dim, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  int total = 1;
  std::array<int, 3> shape{};
  for (int a = 0; a < dim; ++a) {
    shape[a] = n;
    total *= n;
  }
  fftw_complex* buf = fftw_alloc_complex(total);
  PlanPair p;
  p.fwd = fftw_plan_dft(dim, shape.data(), buf, buf, FFTW_FORWARD,
                        FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft(dim, shape.data(), buf, buf, FFTW_BACKWARD,
                        FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  return cache.emplace(key, p).first->second;
}

int wavenumber(int idx, int n) { return idx <= n / 2 - 1 ? idx : idx - n; }

}  // namespace

FourierGrid::FourierGrid(int spatial_dim, int points_per_axis, double domain_length)
    : dim_(spatial_dim), n_(points_per_axis), length_(domain_length) {
  require(dim_ >= 1 && dim_ <= 3, "spatial_dim must be in {1,2,3}");
  require(n_ >= 8, "points_per_axis must be >= 8");
  require((n_ & (n_ - 1)) == 0, "points_per_axis must be a power of two");
  require(length_ > 0, "domain_length must be positive");

  total_ = 1;
  for (int a = 0; a < dim_; ++a) total_ *= n_;
  const double base = 2.0 * kPi / length_;

  kmag_.resize(total_);
  kvec_.resize(total_);
  nyquist_.resize(total_);
  conj_.resize(total_);
  max_kmag_ = 0.0;
  for (int flat = 0; flat < total_; ++flat) {
    int rem = flat, conj_flat = 0, stride = total_;
    double mag2 = 0.0;
    bool nyq = false;
    std::array<double, 3> kv{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) {
      stride /= n_;
      const int idx = rem / stride;
      rem %= stride;
      const int m = wavenumber(idx, n_);
      if (m == -n_ / 2) nyq = true;
      kv[a] = base * m;
      mag2 += kv[a] * kv[a];
      const int cidx = idx == 0 ? 0 : n_ - idx;
      conj_flat += cidx * stride;
    }
    kvec_[flat] = kv;
    kmag_[flat] = std::sqrt(mag2);
    nyquist_[flat] = nyq ? 1 : 0;
    conj_[flat] = conj_flat;
    if (!nyq) max_kmag_ = std::max(max_kmag_, kmag_[flat]);
  }
}

double FourierGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= length_ / n_;
  return v;
}

void FourierGrid::zero_nyquist(std::span<cplx> spectral) const {
  for (int i = 0; i < total_; ++i)
    if (nyquist_[i]) spectral[i] = 0.0;
}

void FourierGrid::to_physical(std::span<const cplx> spectral, std::span<cplx> physical) const {
  require(static_cast<int>(spectral.size()) == total_ &&
              static_cast<int>(physical.size()) == total_,
          "slice size mismatch");
  std::memcpy(physical.data(), spectral.data(), total_ * sizeof(cplx));
  auto& p = plans_for(dim_, n_);
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(physical.data()),
                   reinterpret_cast<fftw_complex*>(physical.data()));
}

void FourierGrid::to_spectral(std::span<const cplx> physical, std::span<cplx> spectral) const {
  require(static_cast<int>(spectral.size()) == total_ &&
              static_cast<int>(physical.size()) == total_,
          "slice size mismatch");
  std::memcpy(spectral.data(), physical.data(), total_ * sizeof(cplx));
  auto& p = plans_for(dim_, n_);
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(spectral.data()),
                   reinterpret_cast<fftw_complex*>(spectral.data()));
  const double inv = 1.0 / total_;
  for (int i = 0; i < total_; ++i) spectral[i] *= inv;
  zero_nyquist(spectral);
}

int FourierGrid::padded_total() const {
  int ptotal = 1;
  for (int a = 0; a < dim_; ++a) ptotal *= padded_axis();
  return ptotal;
}

namespace {
// Flat index of retained mode `flat` inside the padded lattice.
int padded_index(int flat, int dim, int n, int m, int total, int ptotal) {
  int rem = flat, stride = total, pflat = 0, pstride = ptotal;
  for (int a = 0; a < dim; ++a) {
    stride /= n;
    pstride /= m;
    const int idx = rem / stride;
    rem %= stride;
    const int w = wavenumber(idx, n);
    pflat += (w >= 0 ? w : w + m) * pstride;
  }
  return pflat;
}
}  // namespace

void FourierGrid::to_physical_padded(std::span<const cplx> spectral,
                                     std::span<cplx> physical) const {
  const int m = padded_axis();
  const int ptotal = padded_total();
  require(static_cast<int>(physical.size()) == ptotal, "padded slice size mismatch");
  std::fill(physical.begin(), physical.end(), cplx{0.0, 0.0});
  for (int flat = 0; flat < total_; ++flat) {
    if (nyquist_[flat]) continue;
    physical[padded_index(flat, dim_, n_, m, total_, ptotal)] = spectral[flat];
  }
  auto& p = plans_for(dim_, m);
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(physical.data()),
                   reinterpret_cast<fftw_complex*>(physical.data()));
}

void FourierGrid::from_physical_padded(std::span<const cplx> physical,
                                       std::span<cplx> spectral) const {
  const int m = padded_axis();
  const int ptotal = padded_total();
  thread_local std::vector<cplx> buf;
  buf.assign(physical.begin(), physical.end());
  auto& p = plans_for(dim_, m);
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(buf.data()),
                   reinterpret_cast<fftw_complex*>(buf.data()));
  const double inv = 1.0 / ptotal;
  for (int flat = 0; flat < total_; ++flat) {
    spectral[flat] = nyquist_[flat]
                         ? cplx{0.0, 0.0}
                         : buf[padded_index(flat, dim_, n_, m, total_, ptotal)] * inv;
  }
}

void FourierGrid::multiply_dealiased(std::span<const cplx> u, std::span<const cplx> v,
                                     std::span<cplx> out) const {
  const int ptotal = padded_total();
  thread_local std::vector<cplx> pu, pv;
  pu.resize(ptotal);
  pv.resize(ptotal);
  to_physical_padded(u, pu);
  to_physical_padded(v, pv);
  for (int i = 0; i < ptotal; ++i) pu[i] *= pv[i];
  from_physical_padded(pu, out);
}

SpectralField::SpectralField(std::shared_ptr<const FourierGrid> grid, int n_slices,
                             bool parity_tag)
    : grid_(std::move(grid)), n_slices_(n_slices), parity_(parity_tag) {
  require(n_slices_ >= 1, "field needs at least one slice");
  values_.assign(static_cast<std::size_t>(n_slices_) * grid_->total_points(), cplx{0.0, 0.0});
}

double SpectralField::parity_error() const {
  double err = 0.0;
  const int total = grid_->total_points();
  for (int s = 0; s < n_slices_; ++s) {
    auto sl = slice(s);
    for (int i = 0; i < total; ++i) {
      const cplx d = sl[i] - std::conj(sl[grid_->conj_index(i)]);
      err = std::max(err, std::abs(d));
    }
  }
  return err;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require(values_.size() == o.values_.size(), "field size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require(values_.size() == o.values_.size(), "field size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& v : values_) v *= a;
  return *this;
}

}  // namespace kb
