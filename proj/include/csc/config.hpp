#ifndef CSC_CONFIG_HPP
#define CSC_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "csc/harness.hpp"
#include "csc/model.hpp"
#include "csc/tracker.hpp"
#include "csc/training.hpp"

namespace csc {

// Flat dotted-key configuration: one `section.key = value` pair per line,
// `#` comments, blank lines ignored. Later assignments win.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::string& path);

// Merge b into a (b wins).
ConfigMap merge_config(ConfigMap a, const ConfigMap& b);

// Section appliers consume their `prefix.` keys from the map view and throw
// ParseError on unknown keys within the prefix or unparsable values.
void apply_scenario_config(const ConfigMap& map, ScenarioConfig& out);
void apply_model_config(const ConfigMap& map, ModelConfig& out);
void apply_train_config(const ConfigMap& map, TrainConfig& out);
void apply_tracker_config(const ConfigMap& map, TrackerConfig& out);
void apply_noise_config(const ConfigMap& map, NoiseConfig& out);

// Rejects keys whose section prefix is not in `known` (typo guard).
void check_known_sections(const ConfigMap& map, const std::vector<std::string>& known);

}  // namespace csc

#endif
