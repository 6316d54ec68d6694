#pragma once

#include <string>

#include "qsdw/experiments.hpp"

namespace qsdw {

// Flat `key = value` lines; '#' starts a comment, keys are dotted lowercase,
// lists are comma-separated, and grid.lengths accepts 'pi' / '<float>pi'
// tokens. Unknown and duplicate keys are rejected. The returned config is
// resolved (defaults filled) and carries its canonical text and FNV-1a hash.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// Canonical serialization of a resolved config: every key, sorted, one per
// line, doubles at 17 significant digits. Hashing this gives config_hash.
std::string canonical_config_text(const ExperimentConfig& cfg);

// Recompute resolved_text/config_hash (after programmatic edits, e.g. a seed
// override).
void refresh_config_identity(ExperimentConfig& cfg);

}  // namespace qsdw
