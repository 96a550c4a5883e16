#pragma once

#include "spcalda/classifiers.hpp"
#include "spcalda/model_selection.hpp"

#include <json.hpp>

#include <string>

namespace spcalda {

inline constexpr int kFormatVersion = 1;

/// Matrices are stored as {"rows", "cols", "data"} with data in row-major
/// order. Doubles use the shortest text that reads back to the same value.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// Finite gamma as a number, the infinity sentinel as the string "inf".
nlohmann::json gamma_to_json(double gamma);
double gamma_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const ReducedLDAModel& model);
ReducedLDAModel model_from_json(const nlohmann::json& j);

nlohmann::json cv_report_to_json(const CVReport& report);
CVReport cv_report_from_json(const nlohmann::json& j);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace spcalda
