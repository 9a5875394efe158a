#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "exflow/dynamics.hpp"
#include "exflow/ensemble.hpp"

namespace exflow {

/// A named preset with any command-line overrides already applied; config is
/// complete and validated.
struct Scenario {
    std::string name;
    SimulationConfig config;
};

/// CLI-level partial overrides.
struct ConfigOverrides {
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<int> grid_n;  // applied to every patch
    std::optional<std::uint64_t> seed;
};

std::vector<std::string> scenario_names();

/// Preset parameters for one of the named scenarios (throws ValidationError for
/// unknown names). The returned config is fully resolved.
SimulationConfig scenario_config(const std::string& name);

/// Builds a scenario from a preset name and/or a config document, then applies
/// CLI overrides. Keys in the document replace preset values; a document that
/// mentions any patch key replaces the whole patch list.
Scenario make_scenario(const std::string& name, const std::optional<std::string>& config_text,
                       const ConfigOverrides& overrides);

/// Parses and validates a flat key-value config document ("key = value" lines,
/// '#' comments). All defaults are materialized in the returned value, including
/// the auto blob_delta. Schema violations throw ParseError; physically invalid
/// configs throw ValidationError.
SimulationConfig parse_config(const std::string& text);
SimulationConfig parse_config_file(const std::string& path);

/// Extracts just the map.* section of a config document (full simulation
/// configs are accepted; their other keys are ignored). Used by validate-map.
ExteriorMapSpec map_from_config(const std::string& text);

/// Serializes a resolved config so that parse_config(write_config(c)) == c.
std::string write_config(const SimulationConfig& config);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

/// CSV with the fixed diagnostic column order; header prefixed with '#'. An
/// abort message appends a trailing "# ABORTED t=<t>" comment line.
std::string csv_string(const std::vector<DiagnosticRecord>& records,
                       const std::optional<double>& abort_time = std::nullopt);

/// Columns of a diagnostics CSV read back for fitting.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::vector<std::pair<double, double>> series(const std::string& t_col,
                                                  const std::string& r_col) const;
};
CsvTable read_csv_file(const std::string& path);

/// Orbital period of a single-particle run estimated from the unwrapped polar
/// angle of the center-of-vorticity column.
double estimate_orbit_period(const std::vector<DiagnosticRecord>& records);

/// Runs a scenario and writes diagnostics.csv, fit.txt and config.resolved under
/// out_dir. Identical inputs produce byte-identical files. Returns 0 on success,
/// 1 if the simulation aborted (partial CSV is still flushed).
int run_scenario(const Scenario& scenario, const std::string& out_dir);

}  // namespace exflow
