#include "kineticlab/dyadic.hpp"

#include <cmath>
#include <functional>

namespace kb {

namespace {
constexpr double kInner = 0.75;       // chi plateau edge
constexpr double kOuter = 4.0 / 3.0;  // chi support edge
}  // namespace

DyadicSystem::DyadicSystem(std::shared_ptr<const FourierGrid> grid, double transition_sharpness)
    : grid_(std::move(grid)), sharpness_(transition_sharpness) {
  require(sharpness_ > 0, "transition_sharpness must be positive");
  require(grid_->max_kmag() >= kInner, "grid under-resolved");
  q_max_ = static_cast<int>(std::ceil(std::log2(grid_->max_kmag() / kInner)));

  // Scan nonzero modes for the smallest homogeneous shell index in play.
  double min_k = grid_->max_kmag();
  for (int i = 0; i < grid_->total_points(); ++i) {
    const double k = grid_->kmag(i);
    if (k > 0 && !grid_->is_nyquist(i)) min_k = std::min(min_k, k);
  }
  hom_q_min_ = static_cast<int>(std::floor(std::log2(min_k / (8.0 / 3.0))));
}

double DyadicSystem::chi(double t) const {
  if (t <= kInner) return 1.0;
  if (t >= kOuter) return 0.0;
  // C-infinity ramp based on the bump exp(-s/u); equals 1 at the inner edge.
  const double u = (kOuter - t) / (kOuter - kInner);
  const double a = std::exp(-sharpness_ / u);
  const double b = std::exp(-sharpness_ / (1.0 - u));
  return a / (a + b);
}

double DyadicSystem::block_multiplier(int q, double kmag) const {
  return q == -1 ? chi(kmag) : phi(std::ldexp(kmag, -q));
}

double DyadicSystem::low_pass_multiplier(int q, double kmag) const {
  if (q == -1) return 0.0;
  // S_q = sum_{j <= q-1} Delta_j telescopes to chi(2^{-q} k); S_0 = chi(k).
  return chi(std::ldexp(kmag, -q));
}

namespace {

SpectralField apply_multiplier(const FourierGrid& g, const SpectralField& f,
                               const std::function<double(double)>& m) {
  SpectralField out(f.grid_ptr(), f.n_slices(), f.parity_tag());
  const int total = g.total_points();
  std::vector<double> mult(total);
  for (int i = 0; i < total; ++i) mult[i] = g.is_nyquist(i) ? 0.0 : m(g.kmag(i));
  for (int s = 0; s < f.n_slices(); ++s) {
    auto in = f.slice(s);
    auto o = out.slice(s);
    for (int i = 0; i < total; ++i) o[i] = in[i] * mult[i];
  }
  return out;
}

}  // namespace

SpectralField DyadicSystem::block(int q, const SpectralField& f) const {
  require(q >= -1 && q <= q_max_, "block index out of range");
  return apply_multiplier(*grid_, f, [&](double k) { return block_multiplier(q, k); });
}

SpectralField DyadicSystem::low_pass(int q, const SpectralField& f) const {
  require(q >= -1 && q <= q_max_ + 1, "low-pass index out of range");
  return apply_multiplier(*grid_, f, [&](double k) { return low_pass_multiplier(q, k); });
}

SpectralField DyadicSystem::hom_block(int q, const SpectralField& f) const {
  SpectralField out =
      apply_multiplier(*grid_, f, [&](double k) { return phi(std::ldexp(k, -q)); });
  // phi(0) = 0 already removes the mean mode; nothing else to do.
  return out;
}

SpectralField DyadicSystem::paraproduct(const SpectralField& u, const SpectralField& v) const {
  require(u.grid() == v.grid() && u.n_slices() == v.n_slices(), "grid mismatch");
  SpectralField out(u.grid_ptr(), u.n_slices(), u.parity_tag() && v.parity_tag());
  const int total = grid_->total_points();
  std::vector<cplx> prod(total);
  for (int j = 1; j <= q_max_; ++j) {
    SpectralField su = low_pass(j - 1, u);
    SpectralField dv = block(j, v);
    for (int s = 0; s < u.n_slices(); ++s) {
      grid_->multiply_dealiased(su.slice(s), dv.slice(s), prod);
      auto o = out.slice(s);
      for (int i = 0; i < total; ++i) o[i] += prod[i];
    }
  }
  return out;
}

SpectralField DyadicSystem::remainder(const SpectralField& u, const SpectralField& v) const {
  require(u.grid() == v.grid() && u.n_slices() == v.n_slices(), "grid mismatch");
  SpectralField out(u.grid_ptr(), u.n_slices(), u.parity_tag() && v.parity_tag());
  const int total = grid_->total_points();
  std::vector<cplx> prod(total);
  for (int j = -1; j <= q_max_; ++j) {
    SpectralField du = block(j, u);
    for (int jp = std::max(-1, j - 1); jp <= std::min(q_max_, j + 1); ++jp) {
      SpectralField dv = block(jp, v);
      for (int s = 0; s < u.n_slices(); ++s) {
        grid_->multiply_dealiased(du.slice(s), dv.slice(s), prod);
        auto o = out.slice(s);
        for (int i = 0; i < total; ++i) o[i] += prod[i];
      }
    }
  }
  return out;
}

}  // namespace kb
