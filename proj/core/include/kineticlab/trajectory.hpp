#pragma once

#include <memory>
#include <vector>

#include "kineticlab/fourier_grid.hpp"
#include "kineticlab/velocity_grid.hpp"

namespace kb {

// Time-indexed spectral perturbation field f(t; k, xi): one snapshot per
// stored time, all snapshots sharing the spatial grid and velocity grid.
struct DistributionTrajectory {
  std::vector<double> times;
  std::vector<SpectralField> snapshots;
  std::shared_ptr<const VelocityGrid> vgrid;

  int size() const { return static_cast<int>(times.size()); }

  void validate() const {
    require(times.size() == snapshots.size(), "times/snapshots length mismatch");
    require(!times.empty(), "empty trajectory");
    for (std::size_t i = 1; i < times.size(); ++i)
      require(times[i] > times[i - 1], "times must be strictly increasing");
    for (const auto& s : snapshots) {
      require(s.grid() == snapshots.front().grid(), "snapshot grid mismatch");
      require(s.n_slices() == vgrid->size(), "snapshot velocity count mismatch");
    }
  }
};

}  // namespace kb
