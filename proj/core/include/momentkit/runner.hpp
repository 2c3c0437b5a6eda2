#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "momentkit/experiment_config.hpp"

namespace momentkit {

struct StageResult {
  std::string name;
  bool ran = false;      // the stage body executed
  bool ok = true;        // false only when an executed stage threw
  bool skipped = false;  // not requested, not configured, or upstream failed
  std::string note;      // error text or skip reason
  std::vector<std::string> outputs;  // files written, relative to out_dir
  double wall_seconds = 0.0;
  bool converged = true;  // solver convergence inside the stage
};

struct RunManifest {
  std::string config_hash;  // FNV-1a of the canonical config text
  std::string version;
  std::vector<StageResult> stages;
  double wall_seconds = 0.0;
  bool ok = true;         // every executed stage succeeded
  bool converged = true;  // every executed stage's solvers converged
};

// Stage names in execution order: simulate, moments, fit, flow, bound,
// reconstruct, massbounds.
std::vector<std::string> known_stages();

// Runs the pipeline and writes stage outputs plus manifest.json under
// out_dir (created if needed). An empty `stages` selection runs everything
// the config enables; a non-empty selection runs the named stages plus their
// dependency closure. Unknown names, or an explicit request for a stage the
// config does not enable, throw ConfigError. Stage execution errors are
// recorded in the manifest rather than thrown, and the stages depending on a
// failed one are skipped.
RunManifest run_experiment(const ExperimentConfig& config,
                           const std::filesystem::path& out_dir,
                           const std::vector<std::string>& stages = {});

std::string manifest_to_json(const RunManifest& manifest);

}  // namespace momentkit
