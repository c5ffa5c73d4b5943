#pragma once

#include <filesystem>
#include <string>

#include "kineticlab/collision.hpp"
#include "kineticlab/solver.hpp"
#include "kineticlab/verify.hpp"

namespace kb {

// Grid sizes for one run: spatial torus, velocity box, and sphere rule.
struct GridConfig {
  int spatial_dim = 1;
  int x_points = 64;
  double vel_half_width = 6.0;
  int vel_points = 12;
  int sphere_nodes = 26;
  double assembly_prune = 1e-4;

  void validate() const {
    require(spatial_dim >= 1 && spatial_dim <= 3, "spatial_dim must be 1..3");
    require(x_points >= 4 && x_points % 2 == 0, "x_points must be even and >= 4");
    require(vel_half_width > 0.0 && vel_points >= 2, "bad velocity grid");
    require(sphere_nodes >= 2 && sphere_nodes % 2 == 0, "sphere_nodes must be even");
  }
};

// Full run description as read from a JSON config file. Unknown keys are
// rejected; the format version must match the binary's supported version.
struct RunConfig {
  std::string version = "1";
  GridConfig grids;
  double kernel_gamma = 1.0;  // velocity exponent of the collision kernel
  SolverConfig solver;
  TrialSpec trials;
  std::string initial = "random";  // cosine | random | macroscopic
  std::string output_dir = ".";

  void validate() const;
  KernelParams kernel() const;
  InitKind init_kind() const;

  static const std::string& supported_version();
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::filesystem::path& path);
  std::string to_json_text() const;  // canonical serialization (config hashing)
};

}  // namespace kb
