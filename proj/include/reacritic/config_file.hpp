#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace reacritic {

/// INI-style configuration: `[section]` headers, `key = value` lines, `#` or
/// `;` comments. Keys are addressed as "section.key" ("key" before any
/// header). Every entry remembers its line so errors can point at it.
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static ConfigFile parse(std::istream& in, std::string source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, Entry>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list of numbers, e.g. "1, 4, 8".
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::size_t> get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const;
  std::vector<std::uint64_t> get_u64s(const std::string& key, const std::vector<std::uint64_t>& fallback) const;

  /// Throws ConfigError for any key under `section` that is not in `known`.
  void reject_unknown(const std::string& section, const std::vector<std::string>& known) const;

  /// Error message with file, line and key context.
  std::string context(const std::string& key) const;

 private:
  std::map<std::string, Entry> entries_;
  std::string source_;
};

}  // namespace reacritic
