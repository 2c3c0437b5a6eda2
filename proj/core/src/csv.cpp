#include "momentkit/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace momentkit {

std::string format_double(double value) {
  char buffer[40];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

double parse_csv_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end)
    throw std::invalid_argument("not a decimal number: '" + text + "'");
  return value;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const Matrix& rows) {
  if (header.empty()) throw std::invalid_argument("header must be nonempty");
  if (rows.size() > 0 && rows.cols() != static_cast<long>(header.size()))
    throw std::invalid_argument("row width does not match the header");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c > 0) out << ',';
    out << header[c];
  }
  out << '\n';
  for (long i = 0; i < rows.rows(); ++i) {
    for (long c = 0; c < rows.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(rows(i, c));
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header, const Matrix& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_csv(out, header, rows);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::pair<std::vector<std::string>, Matrix> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    header.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }

  std::vector<double> cells;
  long rows = 0;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t begin = 0;
    std::size_t count = 0;
    while (true) {
      const std::size_t comma = line.find(',', begin);
      const std::string cell = line.substr(begin, comma - begin);
      try {
        cells.push_back(parse_csv_double(cell));
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": " +
                                    e.what());
      }
      ++count;
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
    if (count != header.size())
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected " +
                                  std::to_string(header.size()) + " cells");
    ++rows;
  }

  Matrix table(rows, static_cast<long>(header.size()));
  for (long i = 0; i < rows; ++i)
    for (long c = 0; c < table.cols(); ++c)
      table(i, c) = cells[static_cast<std::size_t>(i * table.cols() + c)];
  if (rows == 0) table.resize(0, 0);
  return {std::move(header), std::move(table)};
}

std::pair<std::vector<std::string>, Matrix> read_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in);
}

}  // namespace momentkit
