#include "kineticlab/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace kb {

namespace {

constexpr const char* kFieldFormatVersion = "1";

void check_little_endian() {
  require(std::endian::native == std::endian::little,
          "field files require a little-endian platform");
}

}  // namespace

void write_field(const std::filesystem::path& path, const SpectralField& f,
                 const VelocityGrid* vgrid) {
  check_little_endian();
  const FourierGrid& g = f.grid();
  nlohmann::json h;
  h["version"] = kFieldFormatVersion;
  h["dtype"] = "complex128";
  h["endianness"] = "little";
  h["shape"] = {f.n_slices(), g.total_points()};
  h["parity"] = f.parity_tag();
  h["grid"] = {{"spatial_dim", g.spatial_dim()},
               {"points_per_axis", g.points_per_axis()},
               {"domain_length", g.domain_length()}};
  if (vgrid)
    h["velocity_grid"] = {{"half_width", vgrid->half_width()},
                          {"points_per_axis", vgrid->points_per_axis()}};

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot open field file for writing: " + path.string());
  out << h.dump() << '\n';
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.values().size() * sizeof(cplx)));
  require(out.good(), "failed writing field payload: " + path.string());
}

LoadedField read_field(const std::filesystem::path& path) {
  check_little_endian();
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open field file: " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "field file missing header line");

  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("corrupt field header: ") + e.what());
  }
  try {
    require(h.at("version").get<std::string>() == kFieldFormatVersion,
            "unsupported field format version");
    require(h.at("dtype").get<std::string>() == "complex128", "unsupported dtype");
    require(h.at("endianness").get<std::string>() == "little", "unsupported endianness");
    const auto shape = h.at("shape").get<std::vector<std::int64_t>>();
    require(shape.size() == 2 && shape[0] >= 1 && shape[1] >= 1, "bad shape");
    const auto& gj = h.at("grid");
    auto grid = std::make_shared<FourierGrid>(gj.at("spatial_dim").get<int>(),
                                              gj.at("points_per_axis").get<int>(),
                                              gj.at("domain_length").get<double>());
    require(grid->total_points() == shape[1], "shape inconsistent with grid metadata");

    LoadedField lf;
    lf.field = SpectralField(grid, static_cast<int>(shape[0]),
                             h.value("parity", false));
    if (h.contains("velocity_grid")) {
      const auto& vj = h.at("velocity_grid");
      lf.vgrid = std::make_shared<VelocityGrid>(vj.at("half_width").get<double>(),
                                                vj.at("points_per_axis").get<int>());
      require(lf.vgrid->size() == shape[0], "slice count inconsistent with velocity grid");
    }
    const std::streamsize bytes =
        static_cast<std::streamsize>(lf.field.values().size() * sizeof(cplx));
    in.read(reinterpret_cast<char*>(lf.field.values().data()), bytes);
    require(in.gcount() == bytes, "field payload shorter than header shape");
    in.peek();
    require(in.eof(), "field payload longer than header shape");
    return lf;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("corrupt field header: ") + e.what());
  }
}

}  // namespace kb
