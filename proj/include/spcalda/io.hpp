#pragma once

#include "spcalda/core_linalg.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spcalda {

/// A labeled table read from comma-separated text with a header row.
/// Labels (any text) map to 1..K in order of first appearance.
struct CsvDataset {
    std::vector<std::string> feature_names;
    std::string label_column;
    std::vector<std::string> label_names;  // label k is label_names[k - 1]
    LabeledDataset dataset;
};

CsvDataset parse_labeled_csv(std::istream& in, const std::string& label_column,
                             const std::string& source = "<stream>");
CsvDataset load_csv(const std::string& path, const std::string& label_column);

/// Numeric columns selected by name (all non-skipped columns when `columns`
/// is empty). Used when applying a model to new data.
struct FeatureTable {
    std::vector<std::string> names;
    Matrix values;
};

FeatureTable parse_feature_csv(std::istream& in, const std::vector<std::string>& columns,
                               const std::string& source = "<stream>");
FeatureTable load_feature_csv(const std::string& path, const std::vector<std::string>& columns);

/// 17 significant digits: enough to reproduce any double exactly.
std::string format_double(double v);

/// Writes x1..xp plus the label column.
void write_labeled_csv(std::ostream& out, const Matrix& x, const std::vector<int>& labels,
                       const std::string& label_column = "class");

}  // namespace spcalda
