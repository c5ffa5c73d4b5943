#include "kineticlab/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kb {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
  require(j.is_object(), where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    require(allowed.contains(key), "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void load(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

const std::string& RunConfig::supported_version() {
  static const std::string v = "1";
  return v;
}

void RunConfig::validate() const {
  require(version == supported_version(),
          "config version '" + version + "' not supported (expected '" +
              supported_version() + "')");
  grids.validate();
  require(kernel_gamma >= 0.0 && kernel_gamma <= 1.0, "kernel_gamma must be in [0, 1]");
  solver.validate();
  trials.validate();
  require(initial == "cosine" || initial == "random" || initial == "macroscopic",
          "initial must be cosine | random | macroscopic");
}

KernelParams RunConfig::kernel() const {
  KernelParams kp;
  kp.gamma = kernel_gamma;
  return kp;
}

InitKind RunConfig::init_kind() const {
  if (initial == "cosine") return InitKind::Cosine;
  if (initial == "macroscopic") return InitKind::Macroscopic;
  return InitKind::Random;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid config JSON: ") + e.what());
  }
  reject_unknown(j, "config",
                 {"version", "grids", "kernel_gamma", "solver", "trials", "initial",
                  "output_dir"});
  RunConfig cfg;
  try {
    load(j, "version", cfg.version);
    load(j, "kernel_gamma", cfg.kernel_gamma);
    load(j, "initial", cfg.initial);
    load(j, "output_dir", cfg.output_dir);
    if (j.contains("grids")) {
      const json& g = j.at("grids");
      reject_unknown(g, "grids",
                     {"spatial_dim", "x_points", "vel_half_width", "vel_points",
                      "sphere_nodes", "assembly_prune"});
      load(g, "spatial_dim", cfg.grids.spatial_dim);
      load(g, "x_points", cfg.grids.x_points);
      load(g, "vel_half_width", cfg.grids.vel_half_width);
      load(g, "vel_points", cfg.grids.vel_points);
      load(g, "sphere_nodes", cfg.grids.sphere_nodes);
      load(g, "assembly_prune", cfg.grids.assembly_prune);
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      reject_unknown(s, "solver",
                     {"dt", "T", "amplitude", "picard_max", "picard_tol", "seed",
                      "gamma_prune", "gamma_consistency", "gamma_projection",
                      "implicit_loss", "snapshot_stride"});
      load(s, "dt", cfg.solver.dt);
      load(s, "T", cfg.solver.T);
      load(s, "amplitude", cfg.solver.amplitude);
      load(s, "picard_max", cfg.solver.picard_max);
      load(s, "picard_tol", cfg.solver.picard_tol);
      load(s, "seed", cfg.solver.seed);
      load(s, "gamma_prune", cfg.solver.gamma_prune);
      load(s, "gamma_consistency", cfg.solver.gamma_consistency);
      load(s, "gamma_projection", cfg.solver.gamma_projection);
      load(s, "implicit_loss", cfg.solver.implicit_loss);
      load(s, "snapshot_stride", cfg.solver.snapshot_stride);
    }
    if (j.contains("trials")) {
      const json& t = j.at("trials");
      reject_unknown(t, "trials",
                     {"seed", "n_trials", "spectral_decay", "amplitude", "field_class",
                      "n_times", "T", "gamma_prune", "solver_runs"});
      load(t, "seed", cfg.trials.seed);
      load(t, "n_trials", cfg.trials.n_trials);
      load(t, "spectral_decay", cfg.trials.spectral_decay);
      load(t, "amplitude", cfg.trials.amplitude);
      load(t, "n_times", cfg.trials.n_times);
      load(t, "T", cfg.trials.T);
      load(t, "gamma_prune", cfg.trials.gamma_prune);
      load(t, "solver_runs", cfg.trials.solver_runs);
      if (t.contains("field_class")) {
        const std::string fc = t.at("field_class").get<std::string>();
        if (fc == "general") cfg.trials.field_class = TrialSpec::FieldClass::General;
        else if (fc == "macroscopic") cfg.trials.field_class = TrialSpec::FieldClass::MacroOnly;
        else if (fc == "microscopic") cfg.trials.field_class = TrialSpec::FieldClass::MicroOnly;
        else if (fc == "trajectory") cfg.trials.field_class = TrialSpec::FieldClass::Trajectory;
        else throw Error("unknown field_class: " + fc);
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("invalid config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
  json j;
  j["version"] = version;
  j["grids"] = {{"spatial_dim", grids.spatial_dim},
                {"x_points", grids.x_points},
                {"vel_half_width", grids.vel_half_width},
                {"vel_points", grids.vel_points},
                {"sphere_nodes", grids.sphere_nodes},
                {"assembly_prune", grids.assembly_prune}};
  j["kernel_gamma"] = kernel_gamma;
  j["solver"] = {{"dt", solver.dt},
                 {"T", solver.T},
                 {"amplitude", solver.amplitude},
                 {"picard_max", solver.picard_max},
                 {"picard_tol", solver.picard_tol},
                 {"seed", solver.seed},
                 {"gamma_prune", solver.gamma_prune},
                 {"gamma_consistency", solver.gamma_consistency},
                 {"gamma_projection", solver.gamma_projection},
                 {"implicit_loss", solver.implicit_loss},
                 {"snapshot_stride", solver.snapshot_stride}};
  const char* fc = "general";
  switch (trials.field_class) {
    case TrialSpec::FieldClass::General: fc = "general"; break;
    case TrialSpec::FieldClass::MacroOnly: fc = "macroscopic"; break;
    case TrialSpec::FieldClass::MicroOnly: fc = "microscopic"; break;
    case TrialSpec::FieldClass::Trajectory: fc = "trajectory"; break;
  }
  j["trials"] = {{"seed", trials.seed},
                 {"n_trials", trials.n_trials},
                 {"spectral_decay", trials.spectral_decay},
                 {"amplitude", trials.amplitude},
                 {"field_class", fc},
                 {"n_times", trials.n_times},
                 {"T", trials.T},
                 {"gamma_prune", trials.gamma_prune},
                 {"solver_runs", trials.solver_runs}};
  j["initial"] = initial;
  j["output_dir"] = output_dir;
  return j.dump(2);
}

}  // namespace kb
