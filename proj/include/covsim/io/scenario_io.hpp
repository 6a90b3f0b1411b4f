#pragma once

#include <string>

#include "covsim/eng/scenario.hpp"

namespace covsim::io {

// Parses a scenario file. Unknown keys are rejected with the offending path
// in the message; missing keys take the documented defaults.
eng::Scenario load_scenario(const std::string& path);
eng::Scenario parse_scenario(const std::string& yaml_text);

// Serializes the effective configuration with every default materialized.
// parse_scenario(serialize_scenario(s)) reproduces s exactly.
std::string serialize_scenario(const eng::Scenario& s);

}  // namespace covsim::io
