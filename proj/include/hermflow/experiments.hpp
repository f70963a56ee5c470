#pragma once

// Experiment runner: resolves data presets, dispatches the configured
// experiment, and persists a run manifest, a JSON report, and CSV series.
// The manifest is written exactly once per run, before any result file.

#include <iosfwd>
#include <string>
#include <vector>

#include "hermflow/config.hpp"
#include "hermflow/geometry.hpp"

namespace hermflow {

inline constexpr const char* kToolVersion = "hermflow 0.1.0";

// Form presets: reference | scale:<s> | pair:<a>,<b> | diag:<d1>,<d2> |
// conformal:<amp> | degenerate-exceptional | reference+ddc:<scalar>.
OneOneForm resolve_form_preset(const std::string& preset, const GeometryPtr& g);

// Scalar presets: one | zero | const:<K> | cosx:<amp> | sinrho:<amp> |
// dip:<A>,<kappa>,<x0> | bumpdens:<depth>,<kappa>,<x0>,<lift>.
ScalarField resolve_scalar_preset(const std::string& preset, const GeometryPtr& g);

struct RunResult {
    int exit_code = 0; // 0 ok, 2 solver failure, 3 config error
    std::vector<std::string> outputs;
    std::string message;
};

RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// Convenience: load config from path, then run. Exit code semantics as above.
RunResult run_experiment_file(const std::string& config_path, std::ostream& log);

std::string format_double(double v);

} // namespace hermflow
