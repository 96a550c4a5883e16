#include "spcalda/io.hpp"

#include "spcalda/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace spcalda {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    std::string out = s.substr(first, last - first + 1);
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

RawTable read_table(std::istream& in, const std::string& source) {
    RawTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw ParseError(source + ": line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " fields, header has " +
                             std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
        t.line_numbers.push_back(line_no);
    }
    if (t.header.empty()) throw ParseError(source + ": missing header row");
    if (t.rows.empty()) throw ParseError(source + ": no data rows");
    return t;
}

double parse_number(const std::string& cell, const std::string& source, std::size_t line,
                    const std::string& column) {
    const std::string where = source + ": line " + std::to_string(line) + ", column '" + column + "'";
    if (cell.empty()) throw ParseError(where + ": missing value");
    double v = 0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) throw ParseError(where + ": non-numeric value '" + cell + "'");
    if (!std::isfinite(v)) throw ParseError(where + ": non-finite value '" + cell + "'");
    return v;
}

}  // namespace

CsvDataset parse_labeled_csv(std::istream& in, const std::string& label_column,
                             const std::string& source) {
    const RawTable t = read_table(in, source);
    std::size_t label_at = t.header.size();
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        if (t.header[j] == label_column) label_at = j;
    }
    if (label_at == t.header.size()) {
        throw ConfigError(source + ": label column '" + label_column + "' not found");
    }
    if (t.header.size() < 2) throw ParseError(source + ": no feature columns");

    std::vector<std::string> features;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        if (j != label_at) features.push_back(t.header[j]);
    }
    Matrix x(static_cast<Index>(t.rows.size()), static_cast<Index>(features.size()));
    std::vector<int> y;
    std::vector<std::string> names;
    std::map<std::string, int> mapping;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        Index col = 0;
        for (std::size_t j = 0; j < t.header.size(); ++j) {
            if (j == label_at) continue;
            x(static_cast<Index>(i), col++) =
                parse_number(t.rows[i][j], source, t.line_numbers[i], t.header[j]);
        }
        const std::string& label = t.rows[i][label_at];
        if (label.empty()) {
            throw ParseError(source + ": line " + std::to_string(t.line_numbers[i]) +
                             ", column '" + label_column + "': missing label");
        }
        auto [it, inserted] = mapping.emplace(label, static_cast<int>(names.size()) + 1);
        if (inserted) names.push_back(label);
        y.push_back(it->second);
    }
    const int K = static_cast<int>(names.size());
    return CsvDataset{std::move(features), label_column, std::move(names),
                      LabeledDataset(std::move(x), std::move(y), K)};
}

CsvDataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return parse_labeled_csv(in, label_column, path);
}

FeatureTable parse_feature_csv(std::istream& in, const std::vector<std::string>& columns,
                               const std::string& source) {
    const RawTable t = read_table(in, source);
    std::vector<std::size_t> picks;
    FeatureTable out;
    if (columns.empty()) {
        for (std::size_t j = 0; j < t.header.size(); ++j) picks.push_back(j);
        out.names = t.header;
    } else {
        for (const auto& name : columns) {
            std::size_t at = t.header.size();
            for (std::size_t j = 0; j < t.header.size(); ++j) {
                if (t.header[j] == name) at = j;
            }
            if (at == t.header.size()) {
                throw ConfigError(source + ": feature column '" + name + "' not found");
            }
            picks.push_back(at);
        }
        out.names = columns;
    }
    out.values.resize(static_cast<Index>(t.rows.size()), static_cast<Index>(picks.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        for (std::size_t c = 0; c < picks.size(); ++c) {
            out.values(static_cast<Index>(i), static_cast<Index>(c)) =
                parse_number(t.rows[i][picks[c]], source, t.line_numbers[i], t.header[picks[c]]);
        }
    }
    return out;
}

FeatureTable load_feature_csv(const std::string& path, const std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return parse_feature_csv(in, columns, path);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_labeled_csv(std::ostream& out, const Matrix& x, const std::vector<int>& labels,
                       const std::string& label_column) {
    for (Index j = 0; j < x.cols(); ++j) out << "x" << (j + 1) << ",";
    out << label_column << "\n";
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) out << format_double(x(i, j)) << ",";
        out << labels[static_cast<std::size_t>(i)] << "\n";
    }
}

}  // namespace spcalda
