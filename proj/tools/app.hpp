#pragma once

// Batch front-end: configuration loading and validation, presets, scenario
// execution and result emission.

#include <string>
#include <vector>

#include <json.hpp>

namespace qgphase::cli {

using json = nlohmann::ordered_json;

struct Preset {
  std::string name;
  std::string description;
  json config;
};

/// JSON schema of a scenario config (subset of draft-07 understood by `validate`).
const json& schema();

const std::vector<Preset>& presets();
const Preset& preset(const std::string& name);

/// Parses a config file. ConfigError messages are anchored as path:line:column.
json load_config(const std::string& path);
json parse_config(const std::string& text, const std::string& origin);

/// Applies `a.b.c=value`; value is read as JSON when it parses, else as a string.
void apply_override(json& config, const std::string& assignment);

/// Checks the config against the schema, filling defaults in place.
/// Throws ConfigError naming the offending JSON pointer.
void validate(json& config);

struct RunOutput {
  json report;
  std::vector<std::string> tables;  // written CSV paths
};

/// Runs a validated config, writing <out>/report.json and <out>/tables/*.csv.
RunOutput run_scenario(const json& config, const std::string& out_dir);

/// Process entry point; returns the exit code (0 ok, 1 config, 2 numerical guard, 3 I/O).
int main_entry(int argc, char** argv);

}  // namespace qgphase::cli
