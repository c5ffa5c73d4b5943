#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>

#include <doctest.h>

#include "kineticlab/field_io.hpp"
#include "kineticlab/run_config.hpp"
#include "kineticlab/solver.hpp"

using namespace kb;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  std::shared_ptr<const FourierGrid> grid = std::make_shared<FourierGrid>(1, 16);
  std::shared_ptr<const VelocityGrid> vgrid = std::make_shared<VelocityGrid>(6.0, 8);
  std::shared_ptr<const CollisionTables> tables = std::make_shared<CollisionTables>(
      vgrid, std::make_shared<SphereQuadrature>(26), KernelParams{}, 1e-4);
};

Fixture& fx() {
  static Fixture f;
  return f;
}

double max_gap(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace

TEST_CASE("exponential update matches the exact single-mode solution") {
  auto& f = fx();
  LinearPropagator prop(f.grid, f.vgrid, f.tables->nu(), 0.01);
  SpectralField u(f.grid, f.vgrid->size(), true);
  for (int v = 0; v < f.vgrid->size(); ++v) u.slice(v)[2] = cplx{0.3, -0.1};
  SpectralField rhs(f.grid, f.vgrid->size(), true);
  SpectralField stepped = u;
  prop.advance(stepped, rhs);
  for (int v = 0; v < f.vgrid->size(); ++v) {
    const cplx z{f.tables->nu()(v) * 0.01, f.grid->kvec(2)[0] * f.vgrid->node(v)[0] * 0.01};
    const cplx want = std::exp(-z) * cplx{0.3, -0.1};
    CHECK(std::abs(stepped.slice(v)[2] - want) < 1e-13);
  }

  // Constant forcing drives the mean mode toward rhs / nu as t grows.
  for (int v = 0; v < f.vgrid->size(); ++v) rhs.slice(v)[0] = 1.0;
  SpectralField w(f.grid, f.vgrid->size(), true);
  for (int i = 0; i < 4000; ++i) prop.advance(w, rhs);
  for (int v = 0; v < f.vgrid->size(); v += 97)
    CHECK(std::abs(w.slice(v)[0] - cplx(1.0 / f.tables->nu()(v))) < 1e-6);
}

TEST_CASE("time marching conserves the five spatial-mean moments") {
  auto& f = fx();
  Solver solver(f.tables, f.grid);
  SolverConfig cfg;
  cfg.dt = 5e-3;
  cfg.T = 0.1;
  cfg.amplitude = 1e-3;
  const SpectralField f0 = initial_data(f.grid, f.vgrid, InitKind::Random, 1e-3, 3);
  const SolveResult res = solver.direct_solve(f0, cfg);
  CHECK(res.log.steps.size() == 21);
  const double a0 = res.log.steps.front().mean_a;
  for (const auto& s : res.log.steps) CHECK(std::abs(s.mean_a - a0) < 1e-12);
}

TEST_CASE("zero data stays zero and equal seeds reproduce bit-identical runs") {
  auto& f = fx();
  Solver solver(f.tables, f.grid);
  SolverConfig cfg;
  cfg.dt = 5e-3;
  cfg.T = 0.05;
  const SpectralField z0(f.grid, f.vgrid->size(), true);
  const SolveResult rz = solver.direct_solve(z0, cfg);
  for (const auto& s : rz.log.steps) CHECK(s.energy.Y == 0.0);

  const SpectralField a = initial_data(f.grid, f.vgrid, InitKind::Random, 1e-3, 9);
  const SpectralField b = initial_data(f.grid, f.vgrid, InitKind::Random, 1e-3, 9);
  CHECK(max_gap(a, b) == 0.0);
  const SolveResult r1 = solver.direct_solve(a, cfg);
  const SolveResult r2 = solver.direct_solve(b, cfg);
  CHECK(max_gap(r1.traj.snapshots.back(), r2.traj.snapshots.back()) == 0.0);
}

TEST_CASE("initial data menu scales and projects as requested") {
  auto& f = fx();
  for (InitKind kind : {InitKind::Cosine, InitKind::Random, InitKind::Macroscopic}) {
    const SpectralField u = initial_data(f.grid, f.vgrid, kind, 1e-3, 5);
    CHECK(u.parity_error() < 1e-12);
    // Velocity-weighted physical amplitude equals the request.
    double amp = 0.0;
    std::vector<cplx> phys(f.grid->total_points());
    for (int v = 0; v < f.vgrid->size(); ++v) {
      f.grid->to_physical(u.slice(v), phys);
      for (const cplx& c : phys)
        amp = std::max(amp, std::abs(c) / f.vgrid->sqmu(v));
    }
    CHECK(amp == doctest::Approx(1e-3).epsilon(1e-8));
  }
  MacroProjector proj(f.vgrid);
  const SpectralField m = initial_data(f.grid, f.vgrid, InitKind::Macroscopic, 1e-3, 5);
  const auto dec = proj.project(m);
  double micro2 = 0.0, tot2 = 0.0;
  for (const cplx& c : dec.micro.values()) micro2 += std::norm(c);
  for (const cplx& c : m.values()) tot2 += std::norm(c);
  CHECK(std::sqrt(micro2) < 1e-8 * std::sqrt(tot2));
}

TEST_CASE("iteration differences contract on a short window") {
  // The per-sweep gain of the lagged gain-term coupling behaves like
  // nu*T/(n+1), so geometric contraction needs a short window.
  auto& f = fx();
  Solver solver(f.tables, f.grid);
  SolverConfig cfg;
  cfg.dt = 5e-3;
  cfg.T = 0.05;
  cfg.amplitude = 1e-3;
  const SpectralField f0 = initial_data(f.grid, f.vgrid, InitKind::Random, 1e-3, 11);
  auto st = solver.picard_init(f0, cfg);
  std::vector<double> diffs;
  for (int n = 0; n < 3; ++n) {
    st = solver.picard_sweep(st, cfg);
    diffs.push_back(solver.ytilde_of_difference(st.curr, st.prev));
  }
  CHECK(diffs[1] < 0.5 * diffs[0]);
  CHECK(diffs[2] < 0.5 * diffs[1]);
}

TEST_CASE("field files round-trip bit-exactly") {
  auto& f = fx();
  const SpectralField u = initial_data(f.grid, f.vgrid, InitKind::Random, 0.5, 21);
  const fs::path p = fs::temp_directory_path() / "kb_field_roundtrip.kbf";
  write_field(p, u, f.vgrid.get());
  const LoadedField lf = read_field(p);
  REQUIRE(lf.field.n_slices() == u.n_slices());
  CHECK(lf.field.grid() == u.grid());
  REQUIRE(lf.vgrid != nullptr);
  CHECK(*lf.vgrid == *f.vgrid);
  CHECK(std::memcmp(lf.field.values().data(), u.values().data(),
                    u.values().size() * sizeof(cplx)) == 0);
  fs::remove(p);
}

TEST_CASE("corrupt or truncated field files are rejected") {
  const fs::path p = fs::temp_directory_path() / "kb_field_bad.kbf";
  {
    std::ofstream out(p, std::ios::binary);
    out << "{not json\n";
  }
  CHECK_THROWS_AS((void)read_field(p), Error);
  {
    std::ofstream out(p, std::ios::binary);
    out << R"({"version":"1","dtype":"complex128","endianness":"little","shape":[2,16],)"
        << R"("grid":{"spatial_dim":1,"points_per_axis":16,"domain_length":6.283185307179586}})"
        << "\n short";
  }
  CHECK_THROWS_AS((void)read_field(p), Error);
  fs::remove(p);
}

TEST_CASE("run configs validate keys, versions, and values") {
  RunConfig def;
  def.validate();
  const std::string text = def.to_json_text();
  const RunConfig back = RunConfig::from_json_text(text);
  CHECK(back.to_json_text() == text);

  CHECK_THROWS_WITH_AS((void)RunConfig::from_json_text(R"({"bogus": 1})"),
                       doctest::Contains("unknown key"), Error);
  CHECK_THROWS_WITH_AS((void)RunConfig::from_json_text(R"({"solver": {"Dt": 0.1}})"),
                       doctest::Contains("unknown key"), Error);
  CHECK_THROWS_WITH_AS((void)RunConfig::from_json_text(R"({"version": "99"})"),
                       doctest::Contains("not supported"), Error);
  CHECK_THROWS_AS((void)RunConfig::from_json_text(R"({"solver": {"dt": -1.0}})"), Error);
  CHECK_THROWS_AS((void)RunConfig::from_json_text("still not json"), Error);
}
