#pragma once
// Strict key=value configuration files: '#' starts a comment, blank lines are
// skipped, duplicate keys are errors.  Every key must be consumed by the
// experiment that runs; finish() rejects leftovers so misspelled keys cannot
// silently change an experiment.

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace nibec {

class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text,
                            const std::string& source = "<string>");

  bool has(const std::string& key) const;

  // Required / defaulted accessors; every call marks the key consumed.
  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key);
  int get_int(const std::string& key, int fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback);

  // Comma-separated list of doubles ("1", "0.5,-2", ...).
  std::vector<double> get_double_list(const std::string& key);

  // Keys beginning with `prefix`, in file order (does not consume).
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  // Throws ConfigError naming every key that was never read.
  void finish() const;

  const std::string& source() const { return source_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;  // file order
  std::set<std::string> consumed_;
  std::string source_;

  const std::string* find(const std::string& key) const;
  const std::string& require(const std::string& key);
};

}  // namespace nibec
