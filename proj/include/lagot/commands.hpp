#pragma once

// The four pipelines behind the command-line tool. Each writes its artifacts
// under config.out_dir and returns their paths relative to it, in the order
// written. Timestamps go only to <out>/run.log.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lagot/config.hpp"
#include "lagot/error.hpp"

namespace lagot {

struct CommandOutput {
  std::vector<std::string> files;
  std::vector<std::string> messages;  // the log lines, without timestamps
};

// Grid x grid cost matrix on [0, T]: cost.csv, cost.json and the disk cache.
CommandOutput run_cost(const RunConfig& config);
// Plan, potentials, u / u_hat fields, transport-set masks, velocity fields,
// the interpolation and its trajectories, and certificate.json.
CommandOutput run_transport(const RunConfig& config);
// mather.json, mather_atoms.csv, mu.csv and alpha_T.csv.
CommandOutput run_mather(const RunConfig& config);
// gnuplot scripts and data under plots/ for whatever the earlier commands
// left in the output directory. Throws MissingDependency when there is
// nothing to plot or an artifact referenced by a certificate is missing.
CommandOutput run_plot(const RunConfig& config);

// Dispatches on "cost", "transport", "mather" or "plot"; throws ConfigError
// for any other name.
CommandOutput run_command(std::string_view name, const RunConfig& config);

// 0 ok, 2 configuration (and invalid input), 3 convergence (also divergence
// and LP failures), 4 missing dependency, 1 anything else.
int exit_code_for(ErrorCode code);

}  // namespace lagot
