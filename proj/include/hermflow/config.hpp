#pragma once

// Structured text configuration (INI-style sections of key = value lines,
// '#' comments) for the experiment runner, plus schema validation.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hermflow/geometry.hpp"

namespace hermflow {

struct IniFile {
    // section -> key -> value
    std::map<std::string, std::map<std::string, std::string>> sections;

    static IniFile parse_file(const std::string& path);
    static IniFile parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key, const std::string& fallback = "") const;
    void set(const std::string& section, const std::string& key, const std::string& value);
    std::string dump() const;
};

enum class ExperimentKind { SolveMa, Envelope, Flow, Volume, NullLocus };

std::string to_string(ExperimentKind k);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Flow;
    std::uint64_t seed = 1;
    GeometryPtr geometry;

    // data presets (resolved by the experiment runner)
    std::string theta_preset = "reference";
    std::string f_preset = "one";
    std::string omega0_preset = "reference";

    // solver block
    double tol = 1e-10;
    double dt_initial = 5e-3;
    double dt_min = 1e-7;
    double dt_max = 2e-2;
    double margin_floor = 1e-6;
    double t_max = 1.0;
    std::vector<double> betas;
    std::vector<double> epsilons;
    std::vector<double> t_ladder;
    int samples = 50;
    int refine_iters = 40;

    // thresholds block
    double curvature_threshold = 50.0;
    double z_margin_ratio = 0.05;
    double z_rate_factor = 100.0;
    int cauchy_window = 8;
    double e_neighborhood = 0.3;

    // probe block (null-locus on BlowupCalabi)
    double probe_rho_p = 1.0;
    double probe_rho_q = 5.0;

    // output block
    std::string out_dir = "out";
    bool write_phi = true;

    IniFile raw;
};

struct ValidationIssue {
    std::string where;
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<ValidationIssue> issues;
};

// Schema and range checks only; throws nothing, reports everything found.
ValidationReport validate_config_text(const IniFile& ini);
ValidationReport validate_config_file(const std::string& path);

// Parses and validates; throws ConfigError with the first issue when invalid.
ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig load_config(const IniFile& ini);

// Geometry block round-trip (documented keys: kind, grid, period, interval,
// slopes, tracked).
GeometryPtr geometry_from_ini(const IniFile& ini);
void geometry_to_ini(const ModelGeometry& g, IniFile& ini);

std::uint64_t fnv1a_hash(const std::string& bytes);

} // namespace hermflow
