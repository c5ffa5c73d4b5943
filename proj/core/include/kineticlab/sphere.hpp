#pragma once

#include <vector>

#include "kineticlab/velocity_grid.hpp"

namespace kb {

// Antipodally symmetrized Fibonacci lattice on the unit sphere with equal
// weights summing to 4 pi. Half the nodes lie in the upper hemisphere and the
// other half are their antipodes, so all odd moments vanish exactly.
//
// Collision integrals do not use these nodes verbatim: since the integrand's
// angle argument is measured from the collision direction, the lattice is
// rotated per pair so its polar axis aligns with that direction (see
// CollisionTables). The z-uniform Fibonacci spacing then turns the angular
// integral into a midpoint rule in cos(theta), exact for |cos(theta)|.
class SphereQuadrature {
 public:
  explicit SphereQuadrature(int n_nodes = 26);

  int size() const { return static_cast<int>(nodes_.size()); }
  const Vec3& node(int i) const { return nodes_[i]; }
  double weight() const { return weight_; }  // equal weights, 4 pi / size

  // Hemisphere accessors for the axis-aligned collision rule: entry j holds
  // the polar cosine z_j in (0, 1) and the azimuth phi_j; the antipodal
  // partner is accounted for by doubling the weight.
  int hemisphere_size() const { return static_cast<int>(zc_.size()); }
  double polar_cos(int j) const { return zc_[j]; }
  double azimuth(int j) const { return phi_[j]; }
  double hemisphere_weight() const { return 2.0 * weight_; }

 private:
  std::vector<Vec3> nodes_;
  std::vector<double> zc_, phi_;
  double weight_;
};

}  // namespace kb
