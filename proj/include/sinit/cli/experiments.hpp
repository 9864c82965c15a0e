#pragma once

#include <filesystem>
#include <vector>

#include "sinit/cli/config.hpp"
#include "sinit/initializers.hpp"
#include "sinit/network.hpp"

namespace sinit::cli {

struct RunResult {
  /// Every file written, in write order, including the resolved-config sidecar.
  std::vector<std::filesystem::path> files;
};

/// Writes `config.resolved.json` into the output directory, then dispatches
/// to the subcommand's runner.
RunResult run(const ExperimentConfig& config);

RunResult run_init_dump(const ExperimentConfig& config);
RunResult run_skew_table(const ExperimentConfig& config);
RunResult run_activation_map(const ExperimentConfig& config);
RunResult run_threshold_mc(const ExperimentConfig& config);
RunResult run_depth_propagation(const ExperimentConfig& config);
RunResult run_train_bench(const ExperimentConfig& config);
RunResult run_oui(const ExperimentConfig& config);

/// Scheme `tag` with its parameters (gain, std, …) taken from `config`.
InitScheme scheme_from_config(InitTag tag, const Config& config);

/// ReLU-leading MLP of input_dim followed by `widths`, one scheme everywhere.
MlpSpec experiment_mlp(const Config& config, const InitScheme& scheme);

}  // namespace sinit::cli
