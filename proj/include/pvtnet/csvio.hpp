#pragma once

#include <string>
#include <utility>
#include <vector>

namespace pvtnet {

/// CSV with a '#'-prefixed metadata block, one header line of column names,
/// RFC 4180 quoting. Parsing and re-emitting a document produced by to_csv
/// is byte-identical.
struct CsvDocument {
    std::vector<std::pair<std::string, std::string>> metadata;  // key, value
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

std::string to_csv(const CsvDocument& doc);

CsvDocument parse_csv(const std::string& text);

}  // namespace pvtnet
