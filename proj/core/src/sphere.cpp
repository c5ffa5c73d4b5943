#include "kineticlab/sphere.hpp"

namespace kb {

SphereQuadrature::SphereQuadrature(int n_nodes) {
  require(n_nodes >= 2 && n_nodes % 2 == 0, "sphere node count must be even and >= 2");
  const int m = n_nodes / 2;
  const double golden = 0.5 * (1.0 + std::sqrt(5.0));
  weight_ = 4.0 * kPi / n_nodes;
  zc_.resize(m);
  phi_.resize(m);
  nodes_.reserve(n_nodes);
  for (int j = 0; j < m; ++j) {
    zc_[j] = (2.0 * j + 1.0) / (2.0 * m);
    phi_[j] = 2.0 * kPi * j / golden;
    const double r = std::sqrt(1.0 - zc_[j] * zc_[j]);
    nodes_.push_back({r * std::cos(phi_[j]), r * std::sin(phi_[j]), zc_[j]});
  }
  for (int j = 0; j < m; ++j)
    nodes_.push_back({-nodes_[j][0], -nodes_[j][1], -nodes_[j][2]});
}

}  // namespace kb
