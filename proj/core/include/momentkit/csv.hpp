#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "momentkit/types.hpp"

namespace momentkit {

// Shortest decimal text that parses back to exactly the same double, so
// rewriting unchanged data is byte-identical. Integral values come out
// without a decimal point ("3", not "3.0").
std::string format_double(double value);

// Inverse of format_double; throws std::invalid_argument when `text` is not
// entirely one decimal number.
double parse_csv_double(const std::string& text);

// Comma-separated table with a header line, '\n' line ends, one row per
// matrix row. Column count must match the header.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const Matrix& rows);
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header, const Matrix& rows);

// Reads a table written by write_csv: the header line verbatim plus a dense
// numeric matrix (0 x 0 when only the header is present). Ragged rows or
// non-numeric cells throw std::invalid_argument naming the line.
std::pair<std::vector<std::string>, Matrix> read_csv(std::istream& in);
std::pair<std::vector<std::string>, Matrix> read_csv(
    const std::filesystem::path& path);

}  // namespace momentkit
