#pragma once

#include <string>

#include "qsdw/experiments.hpp"

namespace qsdw {

// Round-trip-exact decimal form, 17 significant digits via std::to_chars.
std::string format_double(double x);

std::string table_to_csv(const Table& table);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string summary_to_json(const RunResult& result);

// Writes into dir: every result table as <name>.csv, the primary table again
// as timeseries.csv, summary.json, and resolved_config.cfg. Creates dir if
// needed.
void write_run_outputs(const RunResult& result, const ExperimentConfig& cfg,
                       const std::string& dir);

}  // namespace qsdw
