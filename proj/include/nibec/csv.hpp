#pragma once
// CSV output with shortest-round-trip number formatting: emitted artifacts
// are byte-stable across runs and parse back to the exact doubles.

#include <fstream>
#include <string>
#include <vector>

namespace nibec {

// Shortest decimal string that parses back to exactly v.
std::string format_number(double v);

class CsvWriter {
 public:
  // Creates (truncates) the file and writes the header row; throws
  // ConfigError when the file cannot be opened.
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  // Cells must match the header width; commas/newlines inside cells are
  // replaced by ';' (the writers only emit numbers and plain labels).
  void row(const std::vector<std::string>& cells);

  // Flush and close; throws NumericalError if the stream failed.
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  size_t width_ = 0;
  void emit(const std::vector<std::string>& cells);
};

}  // namespace nibec
