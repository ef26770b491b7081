#pragma once

#include <iosfwd>
#include <string>

#include "psg/config.hpp"

namespace psg {

enum ExitStatus : int {
    exit_ok = 0,
    /// Finished without residual-tol termination, or a certificate failed.
    exit_not_certified = 1,
    exit_usage = 2,
    exit_domain_error = 3,
};

int cmd_run(const ExperimentConfig& config, std::ostream& out);
int cmd_superiorize(ExperimentConfig config, std::ostream& out);
int cmd_compare(ExperimentConfig config, std::ostream& out);
/// Replays config.trace_path through the certificates.
int cmd_certify(const ExperimentConfig& config, std::ostream& out);
/// Writes A.csv, b.csv and, when known, x_true.csv and W.csv to config.out_dir.
int cmd_gen_problem(const ExperimentConfig& config, std::ostream& out);

/// Parses, dispatches and maps library errors to exit codes.
int run_command(const std::string& name, const ConfigValues& values, std::ostream& out,
                std::ostream& err);

} // namespace psg
