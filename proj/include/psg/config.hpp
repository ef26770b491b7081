#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psg/core.hpp"
#include "psg/oracle.hpp"
#include "psg/superiorize.hpp"

namespace psg {

using ConfigValues = std::map<std::string, std::string>;

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

/// Every recognised key with its documented default.
const std::vector<ConfigKey>& config_keys();

/// key = value lines; '#' starts a comment. Unknown keys are a parse error.
ConfigValues read_config_file(const std::string& path);
ConfigValues parse_config_text(const std::string& text, const std::string& origin = "<text>");

struct ExperimentConfig {
    ProblemSpec problem;
    std::optional<std::string> matrix_file;
    std::optional<std::string> rhs_file;
    SetSpec set;
    ScalingKind scaling = ScalingKind::identity;
    std::optional<std::string> scaling_file;
    /// Multiple of 1/L, or an absolute value.
    double tau_value = 1.0;
    bool tau_relative = true;
    std::optional<double> x0_fill;
    double res_tol = 1e-8;
    std::size_t max_iters = 100000;
    double plateau_frac = 0.01;

    OuterPerturbationPlan outer;
    bool inner = false;
    InnerPerturbationPlan inner_plan;
    /// "auto", "none" or an explicit grid.
    std::optional<TvTarget> target;
    bool target_auto = true;
    bool compare = false;

    /// Empty selects all; {"none"} selects nothing.
    std::vector<std::string> certificates;
    bool use_oracle = true;
    std::string out_dir = ".";
    std::string trace_path;
    std::string report_path;
    std::string oracle_cache;
};

/// Applies defaults, converts and cross-validates. Throws parse-error.
ExperimentConfig parse_config(const ConfigValues& values);

/// Everything needed to launch a run, built from a config.
struct Experiment {
    GeneratedProblem problem;
    ScalingStrategy strategy = ScalingStrategy::identity();
    StepsizePolicy policy = StepsizePolicy::constant(1.0);
    Vector x0;
    std::optional<TvTarget> target;
    std::optional<OracleSolution> oracle;
};

/// Throws invalid-argument when tau violates 0 < tau < 2/L.
Experiment build_experiment(const ExperimentConfig& config);

RunOptions run_options(const ExperimentConfig& config, const Experiment& experiment);

} // namespace psg
