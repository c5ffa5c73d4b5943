#include <cmath>
#include <memory>

#include <doctest.h>

#include "kineticlab/collision.hpp"
#include "kineticlab/macro.hpp"
#include "kineticlab/rng.hpp"

using namespace kb;

namespace {

struct Fixture {
  std::shared_ptr<const FourierGrid> grid = std::make_shared<FourierGrid>(1, 16);
  std::shared_ptr<const VelocityGrid> vgrid = std::make_shared<VelocityGrid>(6.0, 8);
  std::shared_ptr<const DyadicSystem> dyadic = std::make_shared<DyadicSystem>(grid);
  MacroProjector proj{vgrid};

  SpectralField random_field(std::uint64_t seed) const {
    SpectralField f(grid, vgrid->size(), true);
    CounterRng rng(seed, 0);
    for (int v = 0; v < vgrid->size(); ++v) {
      auto sl = f.slice(v);
      for (int k = 0; k < grid->total_points(); ++k) {
        if (grid->is_nyquist(k)) continue;
        const std::uint64_t c = 2 * (static_cast<std::uint64_t>(v) * grid->total_points() + k);
        sl[k] = cplx{rng.normal(c), rng.normal(c + 1)} *
                std::pow(1.0 + grid->kmag(k), -2.0) * vgrid->sqmu(v);
      }
    }
    return f;
  }

  // Velocity profile times a single spatial cosine mode.
  SpectralField profile(const std::function<double(const Vec3&)>& fn) const {
    SpectralField f(grid, vgrid->size(), true);
    for (int v = 0; v < vgrid->size(); ++v) f.slice(v)[0] = fn(vgrid->node(v));
    return f;
  }
};

double rel_gap(const SpectralField& a, const SpectralField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    num += std::norm(a.values()[i] - b.values()[i]);
    den += std::norm(b.values()[i]);
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

TEST_CASE("projection reproduces the fluid basis coefficients exactly") {
  Fixture fx;
  // f = sqrt(mu): density coefficient 1, others 0.
  auto f = fx.profile([](const Vec3& xi) { return sqrt_maxwellian(xi); });
  auto d = fx.proj.project(f);
  CHECK(std::abs(d.coeffs.a.slice(0)[0] - cplx{1.0, 0.0}) < 1e-10);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(d.coeffs.b.slice(i)[0]) < 1e-10);
  CHECK(std::abs(d.coeffs.c.slice(0)[0]) < 1e-10);

  // f = xi_2 sqrt(mu): pure momentum along the second axis.
  auto g = fx.profile([](const Vec3& xi) { return xi[1] * sqrt_maxwellian(xi); });
  auto dg = fx.proj.project(g);
  CHECK(std::abs(dg.coeffs.b.slice(1)[0] - cplx{1.0, 0.0}) < 1e-10);
  CHECK(std::abs(dg.coeffs.a.slice(0)[0]) < 1e-10);
  CHECK(std::abs(dg.coeffs.b.slice(0)[0]) < 1e-10);
}

TEST_CASE("projection is idempotent and orthogonal") {
  Fixture fx;
  SpectralField f = fx.random_field(5);
  auto d = fx.proj.project(f);

  // Pf + micro reconstructs f.
  SpectralField sum = d.pf;
  sum += d.micro;
  CHECK(rel_gap(sum, f) < 1e-12);

  // project(Pf) returns Pf with zero microscopic remainder.
  auto d2 = fx.proj.project(d.pf);
  CHECK(rel_gap(d2.pf, d.pf) < 1e-10);
  double mnorm = 0.0, fnorm = 0.0;
  for (const cplx& c : d2.micro.values()) mnorm += std::norm(c);
  for (const cplx& c : f.values()) fnorm += std::norm(c);
  CHECK(std::sqrt(mnorm) < 1e-10 * std::sqrt(fnorm));

  // (Pf, {I-P}f) = 0 per spatial mode under the quadrature.
  const int total = fx.grid->total_points();
  for (int k = 0; k < total; ++k) {
    cplx ip = 0.0;
    for (int v = 0; v < fx.vgrid->size(); ++v)
      ip += d.pf.slice(v)[k] * std::conj(d.micro.slice(v)[k]) * fx.vgrid->weight();
    CHECK(std::abs(ip) < 1e-12);
  }
}

TEST_CASE("moment functionals match direct quadrature") {
  Fixture fx;
  SpectralField f = fx.random_field(9);
  MomentSet ms = fx.proj.moments(f);
  const int k = 1;  // check one nontrivial spatial mode
  for (int i = 0; i < 3; ++i) {
    for (int m = 0; m < 3; ++m) {
      cplx direct = 0.0;
      for (int v = 0; v < fx.vgrid->size(); ++v) {
        const Vec3& xi = fx.vgrid->node(v);
        const double w = (xi[i] * xi[m] - (i == m ? 1.0 : 0.0)) * sqrt_maxwellian(xi);
        direct += w * f.slice(v)[k] * fx.vgrid->weight();
      }
      CHECK(std::abs(ms.theta.slice(3 * i + m)[k] - direct) < 1e-12);
    }
    cplx direct = 0.0;
    for (int v = 0; v < fx.vgrid->size(); ++v) {
      const Vec3& xi = fx.vgrid->node(v);
      const double w = 0.1 * (norm2(xi) - 5.0) * xi[i] * sqrt_maxwellian(xi);
      direct += w * f.slice(v)[k] * fx.vgrid->weight();
    }
    CHECK(std::abs(ms.lambda.slice(i)[k] - direct) < 1e-12);
  }
}

TEST_CASE("interactive functional vanishes without fluid-microscopic coupling") {
  Fixture fx;
  InteractiveParams params;
  params.validate();
  CHECK_THROWS(InteractiveParams{0.01, 0.1, 0.05}.validate());

  SpectralField zero(fx.grid, fx.vgrid->size(), true);
  for (int q = -1; q <= fx.dyadic->q_max(); ++q)
    CHECK(fx.proj.interactive_functional(zero, q, *fx.dyadic, params) == 0.0);

  // Purely macroscopic f with b = 0: every term carries a momentum
  // coefficient or a microscopic moment, so the functional vanishes.
  auto f = fx.profile([](const Vec3& xi) {
    return (1.0 + 0.3 * (norm2(xi) - 3.0)) * sqrt_maxwellian(xi);
  });
  SpectralField mode(fx.grid, fx.vgrid->size(), true);
  for (int v = 0; v < fx.vgrid->size(); ++v) {
    mode.slice(v)[1] = f.slice(v)[0];
    mode.slice(v)[fx.grid->points_per_axis() - 1] = f.slice(v)[0];
  }
  const SpectralField pf = fx.proj.project(mode).pf;
  for (int q = -1; q <= fx.dyadic->q_max(); ++q)
    CHECK(std::abs(fx.proj.interactive_functional(pf, q, *fx.dyadic, params)) < 1e-12);
}

TEST_CASE("time-independent macroscopic-free transport balances the moment system") {
  // For f(t) constant in time and x-independent, every fluid equation reduces
  // to its source terms; with f = 0 all residuals vanish.
  Fixture fx;
  auto vgrid = fx.vgrid;
  auto sph = std::make_shared<SphereQuadrature>(26);
  auto tables = std::make_shared<CollisionTables>(vgrid, sph, KernelParams{}, 1e-4);
  DistributionTrajectory traj;
  traj.vgrid = vgrid;
  traj.times = {0.0, 0.1, 0.2};
  for (int i = 0; i < 3; ++i) traj.snapshots.push_back(SpectralField(fx.grid, vgrid->size(), true));
  const FluidResidual r = fx.proj.fluid_residual(traj, *tables);
  for (double m : r.max_residual) CHECK(m == 0.0);
}
