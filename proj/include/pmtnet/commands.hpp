#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pmtnet/config.hpp"

namespace pmtnet {

using CommandFn = std::function<void(const RunConfig&, std::ostream&)>;

struct CommandInfo {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
  CommandFn run;
};

/// generate, train, eval, embed, tsne, reconstruct, baselines.
const std::vector<CommandInfo>& command_table();
/// Throws ConfigError for an unknown command name.
const CommandInfo& find_command(const std::string& name);

// Every command writes its artifacts under the `out` directory and prints a
// short summary to `log`.

/// train.dybs and test.dybs from the synthetic generator.
void cmd_generate(const RunConfig& cfg, std::ostream& log);
/// <model>.nlns and <model>_loss.csv (epoch,mean_loss).
void cmd_train(const RunConfig& cfg, std::ostream& log);
/// knn.nlns and svm.nlns trained on the flattened preprocessed grids.
void cmd_baselines(const RunConfig& cfg, std::ostream& log);
/// report.txt and report.kv for the requested methods.
void cmd_eval(const RunConfig& cfg, std::ostream& log);
/// <kind>_features.csv: 26 columns for the cnn, 10 for the autoencoder.
void cmd_embed(const RunConfig& cfg, std::ostream& log);
/// <name>_embedding.csv and <name>.svg.
void cmd_tsne(const RunConfig& cfg, std::ostream& log);
/// reconstruct.svg: input above reconstruction for the chosen events.
void cmd_reconstruct(const RunConfig& cfg, std::ostream& log);

/// Resolves parameters (defaults, then the optional config file, then flags) and runs.
void run_command(const std::string& name, const std::string& config_path, const std::map<std::string, std::string>& flags,
                 std::ostream& log);

}  // namespace pmtnet
