#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "kineticlab/fourier_grid.hpp"
#include "kineticlab/velocity_grid.hpp"

namespace kb {

// On-disk field format: one JSON header line (dtype, shape, endianness,
// format version, grid metadata) followed by the raw complex128 payload in
// slice-major order. Round-trips are bit-exact on little-endian platforms.

void write_field(const std::filesystem::path& path, const SpectralField& f,
                 const VelocityGrid* vgrid = nullptr);

struct LoadedField {
  SpectralField field;
  std::shared_ptr<const VelocityGrid> vgrid;  // null if the file carried none
};

LoadedField read_field(const std::filesystem::path& path);

}  // namespace kb
