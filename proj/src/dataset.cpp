#include "dkl/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dkl/errors.hpp"
#include "dkl/text.hpp"

namespace dkl {

namespace {

double parse_double(const std::string& token, int line_number) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end) {
        throw ParseError("line " + std::to_string(line_number) + ": not a number: '" + token +
                         "'");
    }
    return value;
}

int parse_label(const std::string& token, int line_number) {
    int value = 0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end) {
        throw ParseError("line " + std::to_string(line_number) + ": not an integer label: '" +
                         token + "'");
    }
    return value;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> tokens;
    std::string token;
    std::stringstream stream(line);
    while (std::getline(stream, token, ',')) {
        tokens.push_back(token);
    }
    if (!line.empty() && line.back() == ',') {
        tokens.emplace_back();
    }
    return tokens;
}

}  // namespace

void Dataset::validate() const {
    if (static_cast<int>(labels.size()) != size()) {
        throw std::invalid_argument("dataset: label count does not match feature rows");
    }
    if (!features.allFinite()) {
        throw std::invalid_argument("dataset: non-finite feature");
    }
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] < 1) {
            throw std::invalid_argument("dataset: label at row " + std::to_string(n) +
                                        " must be >= 1");
        }
    }
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
    ds.validate();
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    for (int j = 0; j < ds.dim(); ++j) {
        out << 'f' << (j + 1) << ',';
    }
    out << "label\n";
    for (int n = 0; n < ds.size(); ++n) {
        for (int j = 0; j < ds.dim(); ++j) {
            out << format_double(ds.features(n, j)) << ',';
        }
        out << ds.labels[n] << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ": missing header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = split_commas(line);
    if (header.size() < 2 || header.back() != "label") {
        throw ParseError(path.string() + ": header must be f1,...,fp,label");
    }
    const int p = static_cast<int>(header.size()) - 1;
    for (int j = 0; j < p; ++j) {
        if (header[j] != "f" + std::to_string(j + 1)) {
            throw ParseError(path.string() + ": header column " + std::to_string(j + 1) +
                             " must be f" + std::to_string(j + 1));
        }
    }

    std::vector<double> values;
    std::vector<int> labels;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto tokens = split_commas(line);
        if (static_cast<int>(tokens.size()) != p + 1) {
            throw ParseError("line " + std::to_string(line_number) + ": expected " +
                             std::to_string(p + 1) + " columns, got " +
                             std::to_string(tokens.size()));
        }
        for (int j = 0; j < p; ++j) {
            values.push_back(parse_double(tokens[j], line_number));
        }
        labels.push_back(parse_label(tokens.back(), line_number));
    }

    Dataset ds;
    const int n = static_cast<int>(labels.size());
    ds.features.resize(n, p);
    for (int row = 0; row < n; ++row) {
        for (int j = 0; j < p; ++j) {
            ds.features(row, j) = values[static_cast<std::size_t>(row) * p + j];
        }
    }
    ds.labels = std::move(labels);
    ds.validate();
    return ds;
}

}  // namespace dkl
