#pragma once
// Small helpers for the CSV/JSON artifacts: locale-free number formatting,
// a single timestamped comment line, and file output.

#include <json.hpp>
#include <string>
#include <vector>

namespace fwq {

// Shortest round-trip decimal form, '.' as separator regardless of locale.
std::string num(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  std::string body() const { return body_; }  // header + rows, no timestamp
  std::size_t rows() const { return rows_; }

 private:
  std::size_t cols_;
  std::size_t rows_ = 0;
  std::string body_;
};

std::string timestamp_line();  // "# generated <UTC ISO-8601>\n"
void write_text(const std::string& path, const std::string& text);
void write_csv(const std::string& path, const CsvWriter& csv);  // timestamp line + body
void write_json(const std::string& path, const nlohmann::json& j);
std::string read_text(const std::string& path);

}  // namespace fwq
