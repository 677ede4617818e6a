#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nsbo::csv {

/// Shortest text that parses back to exactly the same double.
std::string format(double v);

/// Numeric CSV with a single header row. Lines starting with '#' are
/// metadata and are kept verbatim in `comments`.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of `name` in the header; throws std::out_of_range if absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

Table read(std::istream& in);
Table read_file(const std::string& path);

void write_header(std::ostream& out, const std::vector<std::string>& header);

/// Writes one row of numbers, comma separated, newline terminated.
void write_row(std::ostream& out, const std::vector<double>& values);

}  // namespace nsbo::csv
