#include "stochlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace stochlab {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

namespace {

std::optional<double> to_double(const std::string& s) {
  const std::string t = trim(s);
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end || t.empty()) return std::nullopt;
  return v;
}

std::optional<long> to_long(const std::string& s) {
  const std::string t = trim(s);
  long v = 0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end || t.empty()) return std::nullopt;
  return v;
}

}  // namespace

ConfigBlock::ConfigBlock(std::string source, std::string type, std::string name, int line)
    : source_(std::move(source)), type_(std::move(type)), name_(std::move(name)), line_(line) {}

std::string ConfigBlock::label() const { return name_.empty() ? "[" + type_ + "]" : "[" + type_ + " " + name_ + "]"; }

void ConfigBlock::set(const std::string& key, std::string value, int line) {
  if (has(key)) fail(key, "duplicate key '" + key + "' (first set on line " + std::to_string(entries_.at(key).line) + ")");
  entries_[key] = {std::move(value), line};
}

void ConfigBlock::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  const int line = it == entries_.end() ? line_ : it->second.line;
  throw ConfigError(source_ + ":" + std::to_string(line) + ": " + label() + " " + message);
}

void ConfigBlock::check_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [key, entry] : entries_)
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(key, "unknown key '" + key + "'");
}

std::string ConfigBlock::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? entries_.at(key).value : fallback;
}

std::string ConfigBlock::require_string(const std::string& key) const {
  if (!has(key)) fail(key, "missing key '" + key + "'");
  return entries_.at(key).value;
}

double ConfigBlock::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const auto v = to_double(entries_.at(key).value);
  if (!v) fail(key, "'" + key + "' is not a number: " + entries_.at(key).value);
  return *v;
}

double ConfigBlock::require_double(const std::string& key) const {
  if (!has(key)) fail(key, "missing key '" + key + "'");
  return get_double(key, 0.0);
}

long ConfigBlock::get_long(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const auto v = to_long(entries_.at(key).value);
  if (!v) fail(key, "'" + key + "' is not an integer: " + entries_.at(key).value);
  return *v;
}

bool ConfigBlock::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = entries_.at(key).value;
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail(key, "'" + key + "' is not a boolean: " + v);
}

std::vector<double> ConfigBlock::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_list(entries_.at(key).value)) {
    const auto v = to_double(item);
    if (!v) fail(key, "'" + key + "' has a non-numeric item: " + item);
    out.push_back(*v);
  }
  return out;
}

std::vector<long> ConfigBlock::get_longs(const std::string& key, const std::vector<long>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<long> out;
  for (const std::string& item : split_list(entries_.at(key).value)) {
    const auto v = to_long(item);
    if (!v) fail(key, "'" + key + "' has a non-integer item: " + item);
    out.push_back(*v);
  }
  return out;
}

std::vector<std::string> ConfigBlock::get_strings(const std::string& key,
                                                  const std::vector<std::string>& fallback) const {
  return has(key) ? split_list(entries_.at(key).value) : fallback;
}

std::vector<const ConfigBlock*> ConfigFile::of_type(const std::string& type) const {
  std::vector<const ConfigBlock*> out;
  for (const ConfigBlock& b : blocks)
    if (b.type() == type) out.push_back(&b);
  return out;
}

const ConfigBlock* ConfigFile::find(const std::string& type, const std::string& name) const {
  for (const ConfigBlock& b : blocks)
    if (b.type() == type && b.name() == name) return &b;
  return nullptr;
}

ConfigFile parse_config(std::istream& in, const std::string& source) {
  ConfigFile file;
  file.source = source;
  std::set<std::pair<std::string, std::string>> seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const std::string where = source + ":" + std::to_string(line) + ": ";

    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(where + "unterminated section header");
      const std::string inner = trim(text.substr(1, text.size() - 2));
      const auto space = inner.find_first_of(" \t");
      const std::string type = inner.substr(0, space);
      const std::string name = space == std::string::npos ? "" : trim(inner.substr(space));
      if (type.empty() || name.find_first_of(" \t") != std::string::npos)
        throw ConfigError(where + "section header must be [type] or [type name]");
      if (!seen.insert({type, name}).second) throw ConfigError(where + "duplicate section [" + inner + "]");
      file.blocks.emplace_back(source, type, name, line);
      continue;
    }

    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (file.blocks.empty()) throw ConfigError(where + "key '" + key + "' outside of any section");
    file.blocks.back().set(key, trim(text.substr(eq + 1)), line);
  }
  return file;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ":0: cannot open config file");
  return parse_config(in, path);
}

}  // namespace stochlab
