#pragma once

#include <string>

#include "fhinf/model.hpp"

namespace fhinf {

// Reads a fuzzy delay model from a JSON file.  Throws std::runtime_error with a
// descriptive message if the file cannot be read, parsed, or validated.
TsDelayModel load_model(const std::string& path);
TsDelayModel parse_model(const std::string& json_text);
std::string model_to_json(const TsDelayModel& model);

// Filter result files: gamma, the three per-rule matrix families, and a free-form
// settings block recording how the filter was produced.
struct FilterFile {
    double gamma = 0.0;
    FuzzyFilter filter;
    std::string certificate;  // "feasible", "infeasible", "indeterminate"
    std::string settings_json;  // serialized settings object, may be empty
};

void save_filter(const std::string& path, const FilterFile& file);
FilterFile load_filter(const std::string& path);

}  // namespace fhinf
