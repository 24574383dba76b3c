#pragma once

#include <string>
#include <vector>

#include "lbsim/config.hpp"

namespace lbsim {

// Ready-to-run experiment definitions; runnable with zero edits.
std::vector<std::string> list_presets();
bool is_preset(const std::string& name);
ExperimentConfig preset_config(const std::string& name);

// Where preset CDF files live; resolved relative to the data directory
// baked at configure time, overridable with LBSIM_DATA_DIR.
std::string data_file(const std::string& name);

} // namespace lbsim
