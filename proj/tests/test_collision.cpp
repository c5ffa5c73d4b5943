#include <cmath>
#include <memory>

#include <doctest.h>

#include "kineticlab/collision.hpp"
#include "kineticlab/rng.hpp"

using namespace kb;

namespace {

// One 12^3 table build shared by all cases in this file.
const CollisionTables& tables12() {
  static auto t = [] {
    auto vg = std::make_shared<VelocityGrid>(6.0, 12);
    auto sph = std::make_shared<SphereQuadrature>(26);
    return std::make_shared<CollisionTables>(vg, sph, KernelParams{}, 1e-4);
  }();
  return *t;
}

int flat12(int i, int j, int k) { return (i * 12 + j) * 12 + k; }

Eigen::VectorXd gaussian_random(const VelocityGrid& vg, std::uint64_t seed,
                                double envelope = 0.2) {
  CounterRng rng(seed, 0);
  Eigen::VectorXd f(vg.size());
  for (int v = 0; v < vg.size(); ++v)
    f(v) = rng.normal(v) * std::exp(-envelope * norm2(vg.node(v)));
  return f;
}

}  // namespace

TEST_CASE("velocity grid captures the equilibrium mass") {
  VelocityGrid vg(6.0, 12);
  CHECK(vg.weight() > 0.0);
  CHECK(vg.captured_mass() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("sphere rule integrates constants and the angular factor exactly") {
  SphereQuadrature sph(26);
  double total = 0.0, btotal = 0.0;
  const CollisionTables& t = tables12();
  for (int k = 0; k < sph.hemisphere_size(); ++k) {
    total += sph.hemisphere_weight();
    btotal += sph.hemisphere_weight() * t.b0_value(k);
  }
  CHECK(total == doctest::Approx(4.0 * kPi).epsilon(1e-12));
  CHECK(btotal == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  CHECK(t.angular_total() == doctest::Approx(2.0 * kPi).epsilon(1e-12));
}

TEST_CASE("collision frequency matches the reference quadrature values") {
  const Eigen::VectorXd& nu = tables12().nu();
  CHECK(nu(flat12(5, 5, 5)) == doctest::Approx(11.1574503622858).epsilon(1e-8));
  CHECK(nu(flat12(6, 6, 6)) == doctest::Approx(11.1574503622858).epsilon(1e-8));
  CHECK(nu(flat12(0, 0, 0)) == doctest::Approx(60.5149414673092).epsilon(1e-8));
  CHECK(nu(flat12(8, 4, 6)) == doctest::Approx(20.707862965626).epsilon(1e-8));
  // Hard-potential growth: nu comparable to (1 + |xi|).
  const auto& vg = tables12().vgrid();
  for (int v = 0; v < vg.size(); v += 37) {
    const double r = std::sqrt(norm2(vg.node(v)));
    CHECK(nu(v) / (1.0 + r) > 2.0);
    CHECK(nu(v) / (1.0 + r) < 10.0);
  }
}

TEST_CASE("collision frequency closed forms at the origin") {
  // gamma = 1: nu(0) = 2 pi * 2 sqrt(2/pi) for the |cos| angular factor.
  CHECK(tables12().nu_at({0.0, 0.0, 0.0}) ==
        doctest::Approx(2.0 * kPi * 2.0 * std::sqrt(2.0 / kPi)).epsilon(1e-2));

  // gamma = 0: nu is identically the angular integral 2 pi.
  auto vg = std::make_shared<VelocityGrid>(6.0, 12);
  auto sph = std::make_shared<SphereQuadrature>(26);
  KernelParams kp;
  kp.gamma = 0.0;
  CollisionTables t0(vg, sph, kp, 1e-4);
  for (int v = 0; v < vg->size(); v += 101)
    CHECK(t0.nu()(v) == doctest::Approx(2.0 * kPi).epsilon(1e-3));
}

TEST_CASE("gain matrix is symmetric and reproduces the frozen entry") {
  const Eigen::MatrixXd& K = tables12().k_matrix();
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() < 1e-8);
  const int c = flat12(5, 5, 5);
  CHECK(K(c, c) == doctest::Approx(2.31467122352337).epsilon(1e-8));
}

TEST_CASE("linearized operator annihilates the collision invariants") {
  const CollisionTables& t = tables12();
  const auto& vg = t.vgrid();
  std::vector<Eigen::VectorXd> span;
  Eigen::VectorXd sq(vg.size()), e2(vg.size());
  std::array<Eigen::VectorXd, 3> mom;
  for (auto& m : mom) m.resize(vg.size());
  for (int v = 0; v < vg.size(); ++v) {
    sq(v) = vg.sqmu(v);
    for (int i = 0; i < 3; ++i) mom[i](v) = vg.node(v)[i] * vg.sqmu(v);
    e2(v) = norm2(vg.node(v)) * vg.sqmu(v);
  }
  span = {sq, mom[0], mom[1], mom[2], e2};
  for (const auto& phi : span) {
    const Eigen::VectorXd L = t.apply_L(phi);
    CHECK(L.norm() / (t.nu().cwiseProduct(phi)).norm() < 5e-2);
  }
  // In particular K sqmu = nu sqmu.
  CHECK((t.apply_K(sq) - t.nu().cwiseProduct(sq)).norm() /
            (t.nu().cwiseProduct(sq)).norm() <
        5e-2);
}

TEST_CASE("linearized operator is nonnegative and maps into the microscopic part") {
  const CollisionTables& t = tables12();
  const auto& vg = t.vgrid();
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd f = gaussian_random(vg, 33 + trial, 0.25);
    const Eigen::VectorXd Lf = t.apply_L(f);
    CHECK(vg.weight() * f.dot(Lf) > -1e-10 * vg.weight() * f.dot(f));
    Eigen::VectorXd micro = Lf;
    t.remove_invariant_moments(micro);
    CHECK((Lf - micro).norm() < 1e-8 * Lf.norm());
  }
}

TEST_CASE("nonlinear operator conserves mass, momentum, and energy") {
  const CollisionTables& t = tables12();
  const auto& vg = t.vgrid();
  Eigen::VectorXd f = gaussian_random(vg, 7);
  const Eigen::VectorXd G = t.gamma_bilinear(f, f);
  const double nrm = std::sqrt(vg.weight() * G.squaredNorm());
  for (int inv = 0; inv < 5; ++inv) {
    double mom = 0.0;
    for (int v = 0; v < vg.size(); ++v) {
      const Vec3& xi = vg.node(v);
      const double phi = inv == 0 ? 1.0 : (inv < 4 ? xi[inv - 1] : norm2(xi));
      mom += vg.weight() * G(v) * phi * vg.sqmu(v);
    }
    CHECK(std::abs(mom) < 1e-2 * nrm);
  }
}

TEST_CASE("equilibrium is a fixed point of the nonlinear operator") {
  const CollisionTables& t = tables12();
  const auto& vg = t.vgrid();
  Eigen::VectorXd sq(vg.size());
  for (int v = 0; v < vg.size(); ++v) sq(v) = vg.sqmu(v);
  const Eigen::VectorXd G = t.gamma_bilinear(sq, sq);
  CHECK(G.norm() / (t.nu().cwiseProduct(sq)).norm() < 1e-2);
}

TEST_CASE("nonlinear operator linearizes to the negative of L about equilibrium") {
  const CollisionTables& t = tables12();
  const auto& vg = t.vgrid();
  Eigen::VectorXd f = gaussian_random(vg, 13, 0.25);
  t.remove_invariant_moments(f);
  Eigen::VectorXd sq(vg.size());
  for (int v = 0; v < vg.size(); ++v) sq(v) = vg.sqmu(v);
  CollisionTables::GammaOptions opt;
  opt.conservative_projection = false;
  const Eigen::VectorXd lin = t.gamma_bilinear(f, sq, opt) + t.gamma_bilinear(sq, f, opt);
  const Eigen::VectorXd Lf = t.apply_L(f);
  CHECK((lin + Lf).norm() / Lf.norm() < 5e-2);
}

TEST_CASE("coercivity holds on microscopic directions") {
  const CollisionTables& t = tables12();
  const auto& vg = t.vgrid();
  double lam = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd f = gaussian_random(vg, 50 + trial, 0.25);
    t.remove_invariant_moments(f);
    const double num = f.dot(t.apply_L(f));
    const double den = f.dot(t.nu().cwiseProduct(f));
    lam = std::min(lam, num / den);
  }
  CHECK(lam > 0.0);
  CHECK(lam == doctest::Approx(0.854).epsilon(0.1));
}

TEST_CASE("field-batched applications agree with the velocity-only kernels") {
  const CollisionTables& t = tables12();
  auto grid = std::make_shared<FourierGrid>(1, 8);
  SpectralField f(grid, t.vgrid().size(), true), g(grid, t.vgrid().size(), true);
  Eigen::VectorXd fv = gaussian_random(t.vgrid(), 3), gv = gaussian_random(t.vgrid(), 4);
  // x-independent fields: only the k = 0 mode is populated.
  for (int v = 0; v < t.vgrid().size(); ++v) {
    f.slice(v)[0] = fv(v);
    g.slice(v)[0] = gv(v);
  }
  const SpectralField kf = apply_field(t, FieldOp::K, f);
  const Eigen::VectorXd kv = t.apply_K(fv);
  double kerr = 0.0;
  for (int v = 0; v < t.vgrid().size(); ++v)
    kerr = std::max(kerr, std::abs(kf.slice(v)[0] - cplx(kv(v))));
  CHECK(kerr < 1e-10 * kv.norm());

  CollisionTables::GammaOptions opt;
  opt.prune = 1e-4;
  const SpectralField gam = apply_field_gamma(t, f, g, opt);
  const Eigen::VectorXd gv2 = t.gamma_bilinear(fv, gv, opt);
  double num = 0.0;
  for (int v = 0; v < t.vgrid().size(); ++v)
    num += std::norm(gam.slice(v)[0] - cplx(gv2(v)));
  CHECK(std::sqrt(num) < 2e-5 * gv2.norm());
}
