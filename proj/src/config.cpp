#include "nibec/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nibec/errors.hpp"

namespace nibec {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path);
}

Config Config::from_string(const std::string& text, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    for (const auto& [k, v] : cfg.entries_)
      if (k == key)
        throw ConfigError(source + ":" + std::to_string(lineno) +
                          ": duplicate key '" + key + "'");
    cfg.entries_.emplace_back(key, value);
  }
  return cfg;
}

const std::string* Config::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

const std::string& Config::require(const std::string& key) {
  const std::string* v = find(key);
  if (!v) throw ConfigError(source_ + ": missing required key '" + key + "'");
  consumed_.insert(key);
  return *v;
}

std::string Config::get_string(const std::string& key) { return require(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  if (!has(key)) return fallback;
  return require(key);
}

double Config::get_double(const std::string& key) {
  const std::string& raw = require(key);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end != raw.c_str() + raw.size() || raw.empty() || errno == ERANGE)
    throw ConfigError(source_ + ": key '" + key + "' is not a number: '" + raw + "'");
  return v;
}

double Config::get_double(const std::string& key, double fallback) {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) {
  const std::string& raw = require(key);
  int v = 0;
  const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (res.ec != std::errc() || res.ptr != raw.data() + raw.size())
    throw ConfigError(source_ + ": key '" + key + "' is not an integer: '" + raw + "'");
  return v;
}

int Config::get_int(const std::string& key, int fallback) {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const std::string& raw = require(key);
  if (raw == "1" || raw == "true") return true;
  if (raw == "0" || raw == "false") return false;
  throw ConfigError(source_ + ": key '" + key + "' is not a boolean: '" + raw + "'");
}

std::uint64_t Config::get_uint64(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const std::string& raw = require(key);
  std::uint64_t v = 0;
  const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (res.ec != std::errc() || res.ptr != raw.data() + raw.size())
    throw ConfigError(source_ + ": key '" + key + "' is not an unsigned integer: '" +
                      raw + "'");
  return v;
}

std::vector<double> Config::get_double_list(const std::string& key) {
  const std::string raw = require(key);
  std::vector<double> out;
  size_t start = 0;
  while (start <= raw.size()) {
    size_t comma = raw.find(',', start);
    if (comma == std::string::npos) comma = raw.size();
    const std::string piece = trim(raw.substr(start, comma - start));
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(piece.c_str(), &end);
    if (piece.empty() || end != piece.c_str() + piece.size() || errno == ERANGE)
      throw ConfigError(source_ + ": key '" + key + "' has a bad list entry: '" +
                        piece + "'");
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

void Config::finish() const {
  std::string unknown;
  for (const auto& [k, v] : entries_)
    if (consumed_.find(k) == consumed_.end())
      unknown += (unknown.empty() ? "" : ", ") + ("'" + k + "'");
  if (!unknown.empty())
    throw ConfigError(source_ + ": unknown key(s): " + unknown);
}

}  // namespace nibec
