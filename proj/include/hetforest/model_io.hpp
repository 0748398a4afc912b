#pragma once

#include <string>

#include "hetforest/forest.hpp"

namespace hetforest {

/// Versioned JSON model document with full-precision decimal floats;
/// load(save(m)) predicts identically to m on any input.
std::string model_to_json(const ForestModel& model);
ForestModel model_from_json(const std::string& text);

void save_model(const ForestModel& model, const std::string& path);
ForestModel load_model(const std::string& path);

}  // namespace hetforest
