#pragma once

// Batch subcommands. Each writes its files into config.out_dir and reports an exit code that
// is nonzero iff a check or a fit precondition failed.

#include <string>
#include <string_view>
#include <vector>

#include "lrcone/config.hpp"

namespace lrcone {

struct CommandOutcome {
    int exit_code = 0;
    std::vector<std::string> files;
    std::vector<std::string> messages;
};

const std::vector<std::string>& command_names();

/// Throws ConfigError for unknown commands and for plans that fail validation
/// (for instance a reflection-unsafe chain length).
CommandOutcome run_command(std::string_view name, const ExperimentConfig& config);

CommandOutcome cmd_field(const ExperimentConfig& config);
CommandOutcome cmd_spectrum(const ExperimentConfig& config);
CommandOutcome cmd_front(const ExperimentConfig& config);
CommandOutcome cmd_fit_alpha(const ExperimentConfig& config);
CommandOutcome cmd_cone(const ExperimentConfig& config);
CommandOutcome cmd_dimer_compare(const ExperimentConfig& config);
CommandOutcome cmd_oracle(const ExperimentConfig& config);
CommandOutcome cmd_sweep(const ExperimentConfig& config);

/// 2 log(1 + theta) / log(lambda) with theta the inverse golden mean; NaN for lambda <= 1.
double asymptotic_exponent(double lambda);

}  // namespace lrcone
