// Microbenchmarks for the kernels that dominate solver wall time: transforms,
// frequency-block multipliers, the collision applications, the fluid
// projection, and the mixed-norm evaluation.

#include <benchmark/benchmark.h>

#include <memory>

#include "kineticlab/collision.hpp"
#include "kineticlab/macro.hpp"
#include "kineticlab/norms.hpp"
#include "kineticlab/rng.hpp"
#include "kineticlab/solver.hpp"

using namespace kb;

namespace {

struct Bench {
  std::shared_ptr<const FourierGrid> grid = std::make_shared<FourierGrid>(1, 64);
  std::shared_ptr<const VelocityGrid> vgrid = std::make_shared<VelocityGrid>(6.0, 8);
  std::shared_ptr<const CollisionTables> tables = std::make_shared<CollisionTables>(
      vgrid, std::make_shared<SphereQuadrature>(26), KernelParams{}, 1e-4);
  std::shared_ptr<const DyadicSystem> dyadic = std::make_shared<DyadicSystem>(grid);
  SpectralField f = initial_data(grid, vgrid, InitKind::Random, 1e-3, 7);
};

Bench& bx() {
  static Bench b;
  return b;
}

void BM_Transform(benchmark::State& state) {
  auto& b = bx();
  std::vector<cplx> phys(b.grid->total_points());
  for (auto _ : state)
    for (int v = 0; v < b.vgrid->size(); ++v) {
      b.grid->to_physical(b.f.slice(v), phys);
      benchmark::DoNotOptimize(phys.data());
    }
}
BENCHMARK(BM_Transform);

void BM_DyadicBlock(benchmark::State& state) {
  auto& b = bx();
  for (auto _ : state) {
    SpectralField g = b.dyadic->block(2, b.f);
    benchmark::DoNotOptimize(g.values().data());
  }
}
BENCHMARK(BM_DyadicBlock);

void BM_ApplyK(benchmark::State& state) {
  auto& b = bx();
  for (auto _ : state) {
    SpectralField g = apply_field(*b.tables, FieldOp::K, b.f);
    benchmark::DoNotOptimize(g.values().data());
  }
}
BENCHMARK(BM_ApplyK);

void BM_GammaPruned(benchmark::State& state) {
  auto& b = bx();
  CollisionTables::GammaOptions opt;
  opt.prune = 0.2;
  for (auto _ : state) {
    SpectralField g = apply_field_gamma(*b.tables, b.f, b.f, opt);
    benchmark::DoNotOptimize(g.values().data());
  }
}
BENCHMARK(BM_GammaPruned);

void BM_Projection(benchmark::State& state) {
  auto& b = bx();
  MacroProjector proj(b.vgrid);
  for (auto _ : state) {
    auto d = proj.project(b.f);
    benchmark::DoNotOptimize(d.micro.values().data());
  }
}
BENCHMARK(BM_Projection);

void BM_BesovNorm(benchmark::State& state) {
  auto& b = bx();
  BesovSpec spec;
  for (auto _ : state)
    benchmark::DoNotOptimize(besov_norm(b.f, spec, *b.dyadic, 2.0, b.vgrid.get()));
}
BENCHMARK(BM_BesovNorm);

}  // namespace

BENCHMARK_MAIN();
