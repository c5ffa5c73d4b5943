#include <algorithm>
#include <set>

#include <doctest.h>

#include "kineticlab/verify.hpp"

using namespace kb;

namespace {

const VerifyContext& ctx() {
  static VerifyContext c = VerifyContext::make(1, 16, 6.0, 8, 26, KernelParams{}, 1e-4);
  return c;
}

TrialSpec small_spec() {
  TrialSpec s;
  s.n_trials = 3;
  s.gamma_prune = 0.1;
  return s;
}

}  // namespace

TEST_CASE("registry lists each estimate exactly once") {
  const auto& ids = registry_ids();
  CHECK(ids.size() == 15);
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == ids.size());
  CHECK(std::find(ids.begin(), ids.end(), "CL_ORDER") != ids.end());
  CHECK_THROWS_AS((void)run_check("NOT_AN_ID", small_spec(), ctx()), Error);
}

TEST_CASE("sampling is deterministic and respects the field class") {
  TrialSpec s = small_spec();
  const SpectralField a = sample_snapshot(s, ctx(), 5);
  const SpectralField b = sample_snapshot(s, ctx(), 5);
  CHECK(a.values() == b.values());
  const SpectralField c = sample_snapshot(s, ctx(), 6);
  CHECK(a.values() != c.values());

  s.field_class = TrialSpec::FieldClass::MacroOnly;
  const SpectralField m = sample_snapshot(s, ctx(), 5);
  const MacroDecomposition d = ctx().proj->project(m);
  double micro2 = 0.0, tot2 = 0.0;
  for (const cplx& z : d.micro.values()) micro2 += std::norm(z);
  for (const cplx& z : m.values()) tot2 += std::norm(z);
  CHECK(micro2 < 1e-16 * tot2);

  s.amplitude = 0.0;
  s.field_class = TrialSpec::FieldClass::General;
  const SpectralField zero = sample_snapshot(s, ctx(), 5);
  for (const cplx& z : zero.values()) CHECK(z == cplx{0.0, 0.0});
}

TEST_CASE("trajectories carry increasing times on the shared grids") {
  const DistributionTrajectory t = sample_trajectory(small_spec(), ctx(), 2);
  t.validate();
  CHECK(t.size() == 3);
  CHECK(t.times.front() == 0.0);
  CHECK(t.times.back() == 1.0);
}

TEST_CASE("constant-1 inequalities hold exactly on sampled trials") {
  for (const char* id : {"CL_ORDER", "SERIES_CONV"}) {
    const InequalityReport r = run_check(id, small_spec(), ctx());
    CHECK(r.exact_check);
    CHECK(r.exact_pass);
    CHECK(!r.hard_violation);
    CHECK(r.max_ratio <= 1.0 + 1e-12);
  }
}

TEST_CASE("operator bounds report positive finite constants") {
  for (const char* id : {"K_BOUND", "BLOCK_BOUND", "BERNSTEIN_EQUIV", "NH_EMBED"}) {
    const InequalityReport r = run_check(id, small_spec(), ctx());
    CHECK(!r.hard_violation);
    CHECK(r.fitted_C > 0.0);
    CHECK(std::isfinite(r.fitted_C));
  }
  const InequalityReport c = run_check("COERCIVITY", small_spec(), ctx());
  CHECK(!c.hard_violation);
  CHECK(c.min_ratio > 0.0);
}

TEST_CASE("nonlinear estimates produce finite ratios on random data") {
  for (const char* id : {"TRILINEAR", "NONLIN_ENERGY", "MOMENT_BOUND", "L_UPPER",
                         "MACRO_DISS"}) {
    TrialSpec s = small_spec();
    s.n_trials = 2;
    const InequalityReport r = run_check(id, s, ctx());
    CHECK(!r.hard_violation);
    CHECK(std::isfinite(r.fitted_C));
    CHECK(r.fitted_C > 0.0);
    CHECK(r.skipped == 0);
  }
}

TEST_CASE("degenerate zero-amplitude trials are skipped, not failed") {
  TrialSpec s = small_spec();
  s.amplitude = 0.0;
  s.n_trials = 2;
  const InequalityReport r = run_check("TRILINEAR", s, ctx());
  CHECK(r.skipped == 2);
  CHECK(!r.hard_violation);
}
