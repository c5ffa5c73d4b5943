// kb: command-line front end for the kinetic laboratory.
//
// Subcommands:
//   simulate   time-march the perturbation equation, emit diagnostics CSV
//   verify     run the randomized inequality harness, emit JSON bundle + CSVs
//   norms      per-block norm breakdown of a stored field + JSON summary
//   decompose  per-block decomposition CSV of a stored field
//
// All artifacts are deterministic given (config, seed); KB_THREADS changes
// only wall time, never bytes.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kineticlab/field_io.hpp"
#include "kineticlab/run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kExitBadInput = 2;
constexpr int kExitDiverged = 3;

// Shortest round-trippable decimal form, so artifacts are byte-stable.
std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  double back;
  std::sscanf(buf, "%lg", &back);
  if (back == x) {
    for (int prec = 1; prec <= 16; ++prec) {
      char s[32];
      std::snprintf(s, sizeof s, "%.*g", prec, x);
      std::sscanf(s, "%lg", &back);
      if (back == x) return s;
    }
  }
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  kb::require(out.good(), "cannot write " + path.string());
  out << text;
}

void write_manifest(const fs::path& dir, const kb::RunConfig& cfg,
                    const std::string& command) {
  const std::string canonical = cfg.to_json_text();
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, fnv1a(canonical));
  json m;
  m["command"] = command;
  m["config_hash"] = hash;
  m["solver_seed"] = cfg.solver.seed;
  m["trial_seed"] = cfg.trials.seed;
  m["tool_version"] = kToolVersion;
  m["config_version"] = cfg.version;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  write_text(dir / "config.json", canonical + "\n");
}

kb::VerifyContext make_context(const kb::RunConfig& cfg) {
  return kb::VerifyContext::make(cfg.grids.spatial_dim, cfg.grids.x_points,
                                 cfg.grids.vel_half_width, cfg.grids.vel_points,
                                 cfg.grids.sphere_nodes, cfg.kernel(),
                                 cfg.grids.assembly_prune);
}

// --- simulate -------------------------------------------------------------

int cmd_simulate(const kb::RunConfig& cfg, const fs::path& out_dir, bool snapshots) {
  fs::create_directories(out_dir);
  const kb::VerifyContext ctx = make_context(cfg);
  kb::Solver solver(ctx.tables, ctx.grid);
  const kb::SpectralField f0 = kb::initial_data(ctx.grid, ctx.vgrid, cfg.init_kind(),
                                                cfg.solver.amplitude, cfg.solver.seed);

  kb::SolveResult res;
  bool diverged = false;
  std::string diverged_what;
  try {
    res = solver.direct_solve(f0, cfg.solver);
  } catch (const kb::Error& e) {
    diverged = true;
    diverged_what = e.what();
  }

  // Fluid-equation residuals on the stored snapshots; the two source-carrying
  // equations dominate the cost, so cap evaluation at ~20 times.
  kb::FluidResidual resid;
  if (!diverged && res.traj.size() >= 3) {
    const int stride = std::max(1, (res.traj.size() - 1) / 20);
    resid = solver.projector().fluid_residual(res.traj, *ctx.tables, stride);
  }

  std::string csv =
      "t,E,D,Y,besov,positivity_margin,mean_a,norm_a,norm_b,norm_c,"
      "res_mass,res_momentum,res_energy,res_theta,res_lambda\n";
  std::size_t ri = 0;
  for (const auto& s : res.log.steps) {
    csv += fmt(s.t) + ',' + fmt(s.energy.E) + ',' + fmt(s.energy.D) + ',' +
           fmt(s.energy.Y) + ',' + fmt(s.inst_norm) + ',' + fmt(s.positivity_margin) +
           ',' + fmt(s.mean_a) + ',' +
           fmt(s.norm_a) + ',' + fmt(s.norm_b) + ',' + fmt(s.norm_c);
    if (ri < resid.eval_times.size() && resid.eval_times[ri] <= s.t + 1e-12) {
      for (double r : resid.per_time[ri]) csv += ',' + fmt(r);
      ++ri;
    } else {
      csv += ",,,,,";
    }
    csv += '\n';
  }
  write_text(out_dir / "diagnostics.csv", csv);
  write_manifest(out_dir, cfg, "simulate");

  if (!diverged && snapshots) {
    for (int i = 0; i < res.traj.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%04d.kbf", i);
      kb::write_field(out_dir / name, res.traj.snapshots[i], ctx.vgrid.get());
    }
  }
  if (diverged) {
    std::fprintf(stderr, "kb simulate: %s (last good step recorded)\n",
                 diverged_what.c_str());
    return kExitDiverged;
  }
  std::printf("kb simulate: %zu steps -> %s\n", res.log.steps.size(),
              out_dir.string().c_str());
  return 0;
}

// --- verify ---------------------------------------------------------------

json report_json(const kb::InequalityReport& r) {
  json j;
  j["id"] = r.id;
  j["trials"] = r.rows.size();
  j["skipped"] = r.skipped;
  j["max_ratio"] = r.max_ratio;
  j["min_ratio"] = r.min_ratio;
  j["fitted_C"] = r.fitted_C;
  j["refinement_drift"] = r.refinement_drift;
  j["exact_check"] = r.exact_check;
  j["exact_pass"] = r.exact_pass;
  j["hard_violation"] = r.hard_violation;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

int cmd_verify(const kb::RunConfig& cfg, const fs::path& out_dir,
               const std::vector<std::string>& only, bool refine) {
  const auto& ids = kb::registry_ids();
  for (const auto& id : only)
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      std::fprintf(stderr, "kb verify: unknown inequality id '%s'\n", id.c_str());
      return kExitBadInput;
    }
  fs::create_directories(out_dir);
  const kb::VerifyContext ctx = make_context(cfg);
  std::optional<kb::VerifyContext> refined;
  if (refine)
    refined = kb::VerifyContext::make(cfg.grids.spatial_dim, 2 * cfg.grids.x_points,
                                      cfg.grids.vel_half_width, cfg.grids.vel_points + 4,
                                      cfg.grids.sphere_nodes, cfg.kernel(),
                                      cfg.grids.assembly_prune);

  bool pass = true;
  json bundle;
  bundle["tool_version"] = kToolVersion;
  bundle["seed"] = cfg.trials.seed;
  bundle["trials"] = cfg.trials.n_trials;
  bundle["reports"] = json::array();
  for (const auto& id : ids) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const kb::InequalityReport rep =
        kb::run_check(id, cfg.trials, ctx, refined ? &*refined : nullptr);
    if (rep.hard_violation || !rep.exact_pass) pass = false;
    if (refine && !rep.exact_check && rep.fitted_C > 0.0 &&
        (rep.refinement_drift > 2.0 || rep.refinement_drift < 0.5))
      pass = false;
    bundle["reports"].push_back(report_json(rep));

    std::string csv = "trial,lhs,rhs,ratio,skipped\n";
    for (const auto& row : rep.rows)
      csv += std::to_string(row.trial) + ',' + fmt(row.lhs) + ',' + fmt(row.rhs) + ',' +
             fmt(row.ratio) + ',' + (row.skipped ? "1" : "0") + '\n';
    write_text(out_dir / (id + ".csv"), csv);
    std::printf("%-16s fitted_C %-12g drift %-8g %s\n", rep.id.c_str(), rep.fitted_C,
                rep.refinement_drift,
                rep.hard_violation ? "VIOLATION" : (rep.exact_pass ? "ok" : "EXACT-FAIL"));
  }
  bundle["pass"] = pass;
  write_text(out_dir / "bundle.json", bundle.dump(2) + "\n");
  write_manifest(out_dir, cfg, "verify");
  return pass ? 0 : 1;
}

// --- norms / decompose ----------------------------------------------------

int load_field_or_die(const fs::path& path, kb::LoadedField& lf) {
  try {
    lf = kb::read_field(path);
  } catch (const kb::Error& e) {
    std::fprintf(stderr, "kb: %s\n", e.what());
    return kExitBadInput;
  }
  return 0;
}

int cmd_decompose(const fs::path& field_path, double s, const fs::path& out_path,
                  bool with_summary) {
  kb::LoadedField lf;
  if (int rc = load_field_or_die(field_path, lf)) return rc;
  const kb::SpectralField& f = lf.field;
  const kb::FourierGrid& g = f.grid();
  kb::DyadicSystem dy(f.grid_ptr());
  const double vol = g.total_points() * g.cell_volume();
  const double w = lf.vgrid ? lf.vgrid->weight() : 1.0;

  double total2 = 0.0;
  for (const kb::cplx& c : f.values()) total2 += std::norm(c);
  total2 *= vol * w;

  std::string csv = "q,block_norm,weight,contribution,reconstruction\n";
  double besov = 0.0, recon_sum = 0.0;
  for (int q = -1; q <= dy.q_max(); ++q) {
    double b2 = 0.0, recon = 0.0;
    for (int v = 0; v < f.n_slices(); ++v) {
      const auto sl = f.slice(v);
      for (int k = 0; k < g.total_points(); ++k) {
        const double m = dy.block_multiplier(q, g.kmag(k));
        const double a2 = std::norm(sl[k]);
        b2 += m * m * a2;
        recon += m * a2;  // (f, Delta_q f); sums to ||f||^2 over q
      }
    }
    b2 *= vol * w;
    recon *= vol * w;
    const double bn = std::sqrt(b2);
    const double weight = std::pow(2.0, q * s);
    besov += weight * bn;
    recon_sum += recon;
    csv += std::to_string(q) + ',' + fmt(bn) + ',' + fmt(weight) + ',' +
           fmt(weight * bn) + ',' + fmt(recon) + '\n';
  }
  write_text(out_path, csv);

  if (with_summary) {
    json sum;
    sum["s"] = s;
    sum["besov_norm"] = besov;
    sum["l2_norm"] = std::sqrt(total2);
    sum["reconstruction_l2"] = std::sqrt(std::max(0.0, recon_sum));
    sum["n_slices"] = f.n_slices();
    fs::path jp = out_path;
    jp.replace_extension(".json");
    write_text(jp, sum.dump(2) + "\n");
  }
  std::printf("kb: wrote %s (s = %g)\n", out_path.string().c_str(), s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinetic laboratory command-line tool"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", field_path, only_csv;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> trials_override;
  double s_exponent = 1.5;
  bool snapshots = false, refine = false;

  auto* sim = app.add_subcommand("simulate", "time-march and emit diagnostics");
  sim->add_option("--config", config_path, "JSON run config")->required();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--seed", seed_override, "override solver seed");
  sim->add_flag("--snapshots", snapshots, "store trajectory snapshots");

  auto* ver = app.add_subcommand("verify", "run the inequality harness");
  ver->add_option("--config", config_path, "JSON run config");
  ver->add_option("--out", out_dir, "output directory");
  ver->add_option("--seed", seed_override, "override trial seed");
  ver->add_option("--trials", trials_override, "override trial count");
  ver->add_option("--only", only_csv, "comma-separated inequality ids");
  ver->add_flag("--refine", refine, "rerun on doubled grids and report drift");

  auto* nrm = app.add_subcommand("norms", "per-block norms + JSON summary");
  nrm->add_option("field", field_path, "stored field file")->required();
  nrm->add_option("--s", s_exponent, "regularity exponent");
  nrm->add_option("--out", out_dir, "output directory");

  auto* dec = app.add_subcommand("decompose", "per-block decomposition CSV");
  dec->add_option("field", field_path, "stored field file")->required();
  dec->add_option("--s", s_exponent, "regularity exponent");
  dec->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    kb::RunConfig cfg;
    if (!config_path.empty()) cfg = kb::RunConfig::from_file(config_path);
    if (seed_override) {
      cfg.solver.seed = *seed_override;
      cfg.trials.seed = *seed_override;
    }
    if (trials_override) cfg.trials.n_trials = *trials_override;
    cfg.validate();

    if (sim->parsed()) {
      kb::require(!config_path.empty(), "simulate requires --config");
      return cmd_simulate(cfg, out_dir, snapshots);
    }
    if (ver->parsed()) {
      std::vector<std::string> only;
      for (std::size_t p = 0; p < only_csv.size();) {
        const std::size_t c = only_csv.find(',', p);
        const std::size_t e = (c == std::string::npos) ? only_csv.size() : c;
        if (e > p) only.push_back(only_csv.substr(p, e - p));
        p = e + 1;
      }
      return cmd_verify(cfg, out_dir, only, refine);
    }
    fs::create_directories(out_dir);
    if (nrm->parsed())
      return cmd_decompose(field_path, s_exponent,
                           fs::path(out_dir) / "norms.csv", true);
    return cmd_decompose(field_path, s_exponent,
                         fs::path(out_dir) / "decompose.csv", false);
  } catch (const kb::Error& e) {
    std::fprintf(stderr, "kb: %s\n", e.what());
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "kb: %s\n", e.what());
    return kExitBadInput;
  }
}
