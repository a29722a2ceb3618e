#pragma once

#include <string>

#include "glc/eval.hpp"

namespace glc {

// Plain-text experiment configuration: '#' comments, [section] headers and
// key = value lines. Sections/keys are documented in the README; unknown
// sections or keys, missing required keys and unparsable values all throw
// data_error naming the offending key.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& display_name);

}  // namespace glc
