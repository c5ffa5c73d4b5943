#include <cmath>
#include <memory>

#include <doctest.h>

#include "kineticlab/dyadic.hpp"
#include "kineticlab/fourier_grid.hpp"
#include "kineticlab/rng.hpp"

using namespace kb;

namespace {

std::shared_ptr<const FourierGrid> grid64() {
  static auto g = std::make_shared<FourierGrid>(1, 64);
  return g;
}

SpectralField random_scalar(std::uint64_t seed, double decay = 2.0) {
  auto g = grid64();
  SpectralField f(g, 1, true);
  CounterRng rng(seed, 0);
  auto sl = f.slice(0);
  for (int k = 0; k < g->total_points(); ++k) {
    if (g->is_nyquist(k)) continue;
    sl[k] = cplx{rng.normal(2 * k), rng.normal(2 * k + 1)} *
            std::pow(1.0 + g->kmag(k), -decay);
  }
  for (int k = 0; k < g->total_points(); ++k) {
    const int ck = g->conj_index(k);
    if (ck < k) continue;
    const cplx h = 0.5 * (sl[k] + std::conj(sl[ck]));
    sl[k] = h;
    sl[ck] = std::conj(h);
  }
  return f;
}

double rel_err(const SpectralField& a, const SpectralField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    num += std::norm(a.values()[i] - b.values()[i]);
    den += std::norm(b.values()[i]);
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

// The fixed reference field used for the frozen block-norm values below:
// fhat(0) = 0.3, fhat(m) = (1 + 0.5i)/(1 + m^2) for m = 1..5, Hermitian.
SpectralField reference_field() {
  auto g = grid64();
  SpectralField f(g, 1, true);
  auto sl = f.slice(0);
  const int n = g->points_per_axis();
  sl[0] = 0.3;
  for (int m = 1; m <= 5; ++m) {
    sl[m] = cplx{1.0, 0.5} / (1.0 + m * m);
    sl[n - m] = std::conj(sl[m]);
  }
  return f;
}

}  // namespace

TEST_CASE("transform round trip and derivative") {
  auto g = grid64();
  SpectralField f = random_scalar(11);
  std::vector<cplx> phys(g->total_points()), back(g->total_points());
  g->to_physical(f.slice(0), phys);
  g->to_spectral(phys, back);
  double err = 0.0;
  for (int k = 0; k < g->total_points(); ++k)
    err = std::max(err, std::abs(back[k] - f.slice(0)[k]));
  CHECK(err < 1e-13);

  // d/dx cos(3x) = -3 sin(3x) through the ik multiplier.
  SpectralField c(g, 1, true);
  c.slice(0)[3] = 0.5;
  c.slice(0)[g->points_per_axis() - 3] = 0.5;
  std::vector<cplx> d(g->total_points());
  for (int k = 0; k < g->total_points(); ++k)
    d[k] = c.slice(0)[k] * cplx{0.0, g->kvec(k)[0]};
  g->to_physical(d, phys);
  const double dx = g->domain_length() / g->points_per_axis();
  for (int x = 0; x < g->total_points(); ++x)
    CHECK(std::abs(phys[x].real() + 3.0 * std::sin(3.0 * x * dx)) < 1e-12);
}

TEST_CASE("dealiased product matches exact convolution for low modes") {
  auto g = grid64();
  SpectralField u(g, 1, true), v(g, 1, true);
  const int n = g->points_per_axis();
  u.slice(0)[2] = 1.0;
  u.slice(0)[n - 2] = 1.0;  // 2 cos(2x)
  v.slice(0)[3] = 0.5;
  v.slice(0)[n - 3] = 0.5;  // cos(3x)
  std::vector<cplx> prod(g->total_points());
  g->multiply_dealiased(u.slice(0), v.slice(0), prod);
  // 2 cos 2x cos 3x = cos 5x + cos x.
  for (int k = 0; k < n; ++k) {
    cplx want = 0.0;
    if (k == 5 || k == n - 5 || k == 1 || k == n - 1) want = 0.5;
    CHECK(std::abs(prod[k] - want) < 1e-13);
  }
}

TEST_CASE("partition of unity is exact on the wavenumber lattice") {
  auto g = grid64();
  DyadicSystem dy(g);
  double worst = 0.0;
  for (int k = 0; k < g->total_points(); ++k) {
    double total = dy.chi(g->kmag(k));
    for (int q = 0; q <= dy.q_max(); ++q) total += dy.phi(std::ldexp(g->kmag(k), -q));
    worst = std::max(worst, std::abs(total - 1.0));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("block reconstruction sums back to the field") {
  auto g = grid64();
  DyadicSystem dy(g);
  for (int t = 0; t < 10; ++t) {
    SpectralField f = random_scalar(100 + t);
    SpectralField sum(g, 1, true);
    for (int q = -1; q <= dy.q_max(); ++q) sum += dy.block(q, f);
    CHECK(rel_err(sum, f) < 1e-10);
  }
}

TEST_CASE("low-pass telescopes the blocks below q") {
  auto g = grid64();
  DyadicSystem dy(g);
  SpectralField f = random_scalar(7);
  for (int q : {0, 2, dy.q_max()}) {
    SpectralField sum(g, 1, true);
    for (int j = -1; j <= q - 1; ++j) sum += dy.block(j, f);
    CHECK(rel_err(dy.low_pass(q, f), sum) < 1e-12);
  }
  for (std::size_t i = 0; i < f.values().size(); ++i)
    CHECK(std::abs(dy.low_pass(-1, f).values()[i]) == 0.0);
}

TEST_CASE("product decomposition: two paraproducts plus remainder") {
  auto g = grid64();
  DyadicSystem dy(g);
  SpectralField u = random_scalar(21), v = random_scalar(22);
  SpectralField sum = dy.paraproduct(u, v);
  sum += dy.paraproduct(v, u);
  sum += dy.remainder(u, v);
  SpectralField prod(g, 1, true);
  std::vector<cplx> p(g->total_points());
  g->multiply_dealiased(u.slice(0), v.slice(0), p);
  std::copy(p.begin(), p.end(), prod.slice(0).begin());
  CHECK(rel_err(sum, prod) < 1e-10);
}

TEST_CASE("block norms of the reference field match the frozen values") {
  auto g = grid64();
  DyadicSystem dy(g);
  SpectralField f = reference_field();
  const double vol = g->total_points() * g->cell_volume();
  const double expected[4] = {1.47757038468917, 0.8732708566736, 0.509973544722672,
                              0.173417628297562};
  double besov = 0.0;
  CHECK(dy.q_max() == 6);
  for (int q = -1; q <= dy.q_max(); ++q) {
    double b2 = 0.0;
    const SpectralField bq = dy.block(q, f);
    for (const cplx& c : bq.values()) b2 += std::norm(c);
    const double bn = std::sqrt(vol * b2);
    if (q <= 2)
      CHECK(bn == doctest::Approx(expected[q + 1]).epsilon(1e-10));
    else
      CHECK(bn < 1e-12);
    besov += std::pow(2.0, 1.5 * q) * bn;
  }
  CHECK(besov == doctest::Approx(4.22543490919773).epsilon(1e-10));
}

TEST_CASE("counter rng is stream and counter addressable") {
  CounterRng a(42, 1), b(42, 1), c(42, 2);
  CHECK(a.normal(7) == b.normal(7));
  CHECK(a.normal(7) != c.normal(7));
  CHECK(a.uniform(3) >= 0.0);
  CHECK(a.uniform(3) < 1.0);
}
