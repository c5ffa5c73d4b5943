#include "kineticlab/velocity_grid.hpp"

namespace kb {

VelocityGrid::VelocityGrid(double half_width, int points_per_axis)
    : half_width_(half_width), n_(points_per_axis) {
  require(half_width_ > 0 && n_ >= 4, "invalid velocity grid parameters");
  h_ = 2.0 * half_width_ / n_;
  weight_ = h_ * h_ * h_;
  nodes_.reserve(static_cast<std::size_t>(n_) * n_ * n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        nodes_.push_back({-half_width_ + h_ * (i + 0.5), -half_width_ + h_ * (j + 0.5),
                          -half_width_ + h_ * (k + 0.5)});
  mu_.resize(nodes_.size());
  sqmu_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    mu_[i] = maxwellian(nodes_[i]);
    sqmu_[i] = sqrt_maxwellian(nodes_[i]);
  }
}

double VelocityGrid::captured_mass() const {
  double m = 0.0;
  for (double v : mu_) m += v;
  return m * weight_;
}

}  // namespace kb
