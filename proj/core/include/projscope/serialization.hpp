#pragma once

#include <filesystem>
#include <string>

#include "projscope/learning.hpp"

namespace projscope {

/// `{user_id, kind, lambda, w1, w2, w3, w4, cv_rmse, test_rmse, test_mae}`
/// plus `test_abs_errors` for the error histogram.
std::string model_to_json(const RegressionModel& m);
RegressionModel model_from_json(const std::string& text);
void write_model(const RegressionModel& m, const std::filesystem::path& path);
RegressionModel read_model(const std::filesystem::path& path);

std::string training_set_to_json(const TrainingSet& t);
TrainingSet training_set_from_json(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace projscope
