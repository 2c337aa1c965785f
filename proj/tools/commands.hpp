#pragma once

#include <ostream>

#include "experiment_config.hpp"

namespace latvol::cli {

enum ExitCode : int { kOk = 0, kAssertFailed = 1, kInvalidInput = 2, kSolverFailure = 3 };

// Each command writes its result to `out` and returns an exit code. Invalid
// parameters are reported by throwing std::invalid_argument.
int cmd_bondvol(const ExperimentConfig& cfg, bool check, std::ostream& out);
int cmd_patchtest(const ExperimentConfig& cfg, bool check, std::ostream& out);
int cmd_converge(const ExperimentConfig& cfg, bool check, std::ostream& out);
int cmd_stability(const ExperimentConfig& cfg, bool check, std::ostream& out);
int cmd_selftest(const ExperimentConfig& cfg, std::ostream& out);
int cmd_model(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace latvol::cli
