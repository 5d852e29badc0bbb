#pragma once

// Flat sectioned key/value configuration:
//
//   # comment
//   [run]
//   suites = verdicts, mc
//   [manifold plane]
//   kind = euclidean
//   dim = 2
//
// Sections are `[type]` or `[type name]`; values are scalars or comma separated lists.

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochlab/errors.hpp"

namespace stochlab {

/// Invalid configuration. The message starts with `source:line:`.
class ConfigError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct ConfigEntry {
  std::string value;
  int line = 0;
};

class ConfigBlock {
 public:
  ConfigBlock(std::string source, std::string type, std::string name, int line);

  const std::string& type() const { return type_; }
  const std::string& name() const { return name_; }
  int line() const { return line_; }
  /// `[type]` or `[type name]`.
  std::string label() const;

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, std::string value, int line);
  const std::map<std::string, ConfigEntry>& entries() const { return entries_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<long> get_longs(const std::string& key, const std::vector<long>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

  /// ConfigError pointing at `key` (or at the section header when the key is absent).
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  /// ConfigError for keys outside `allowed`.
  void check_keys(const std::vector<std::string>& allowed) const;

 private:
  std::string source_;
  std::string type_;
  std::string name_;
  int line_;
  std::map<std::string, ConfigEntry> entries_;
};

class ConfigFile {
 public:
  std::string source;
  std::vector<ConfigBlock> blocks;

  /// Blocks of one type in file order.
  std::vector<const ConfigBlock*> of_type(const std::string& type) const;
  const ConfigBlock* find(const std::string& type, const std::string& name = {}) const;
};

ConfigFile parse_config(std::istream& in, const std::string& source);
ConfigFile load_config(const std::string& path);

std::vector<std::string> split_list(const std::string& text);
std::string trim(const std::string& s);

}  // namespace stochlab
