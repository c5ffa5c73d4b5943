#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "kineticlab/common.hpp"

namespace kb {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec3& a) { return dot(a, a); }

// Normalized global Maxwellian (2 pi)^{-3/2} exp(-|xi|^2 / 2) and its root.
inline double maxwellian(const Vec3& xi) {
  return std::pow(2.0 * kPi, -1.5) * std::exp(-0.5 * norm2(xi));
}
inline double sqrt_maxwellian(const Vec3& xi) {
  return std::pow(2.0 * kPi, -0.75) * std::exp(-0.25 * norm2(xi));
}

// Cubic midpoint lattice on [-R, R]^3: nodes at -R + h (j + 1/2), uniform
// weight h^3. Velocity integrals are plain weighted sums over the nodes.
class VelocityGrid {
 public:
  VelocityGrid(double half_width = 6.0, int points_per_axis = 12);

  double half_width() const { return half_width_; }
  int points_per_axis() const { return n_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  double weight() const { return weight_; }  // uniform cell volume h^3
  double spacing() const { return h_; }

  const Vec3& node(int i) const { return nodes_[i]; }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  double mu(int i) const { return mu_[i]; }
  double sqmu(int i) const { return sqmu_[i]; }
  const std::vector<double>& sqmu() const { return sqmu_; }

  // Total Maxwellian mass captured by the quadrature (close to 1).
  double captured_mass() const;

  bool operator==(const VelocityGrid& o) const {
    return half_width_ == o.half_width_ && n_ == o.n_;
  }

 private:
  double half_width_, h_, weight_;
  int n_;
  std::vector<Vec3> nodes_;
  std::vector<double> mu_, sqmu_;
};

}  // namespace kb
