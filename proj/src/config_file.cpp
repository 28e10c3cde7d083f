#include "reacritic/config_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "reacritic/errors.hpp"

namespace reacritic {
namespace {

std::string trim(const std::string& s) {
  auto begin = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  auto end = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return begin < end ? std::string(begin, end) : std::string();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, std::string source) {
  ConfigFile cfg;
  cfg.source_ = std::move(source);
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto comment = raw.find_first_of("#;");
    const std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(cfg.source_ + ":" + std::to_string(line_no) + ": malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(cfg.source_ + ":" + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(cfg.source_ + ":" + std::to_string(line_no) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.entries_.count(full)) {
      throw ConfigError(cfg.source_ + ":" + std::to_string(line_no) + ": duplicate key '" + full + "'");
    }
    cfg.entries_[full] = Entry{trim(line.substr(eq + 1)), line_no};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse(in, path.string());
}

std::string ConfigFile::context(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return source_ + ": key '" + key + "'";
  return source_ + ":" + std::to_string(it->second.line) + ": key '" + key + "'";
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  double v = 0.0;
  if (!parse_number(it->second.value, v)) {
    throw ConfigError(context(key) + ": expected a number, got '" + it->second.value + "'");
  }
  return v;
}

std::size_t ConfigFile::get_size(const std::string& key, std::size_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::size_t v = 0;
  if (!parse_number(it->second.value, v)) {
    throw ConfigError(context(key) + ": expected a non-negative integer, got '" + it->second.value + "'");
  }
  return v;
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::uint64_t v = 0;
  if (!parse_number(it->second.value, v)) {
    throw ConfigError(context(key) + ": expected a non-negative integer, got '" + it->second.value + "'");
  }
  return v;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const auto& v = it->second.value;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(context(key) + ": expected a boolean, got '" + v + "'");
}

std::vector<double> ConfigFile::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(it->second.value)) {
    double v = 0.0;
    if (!parse_number(item, v)) throw ConfigError(context(key) + ": bad list element '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::size_t> ConfigFile::get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<std::size_t> out;
  for (const auto& item : split_list(it->second.value)) {
    std::size_t v = 0;
    if (!parse_number(item, v)) throw ConfigError(context(key) + ": bad list element '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint64_t> ConfigFile::get_u64s(const std::string& key,
                                                const std::vector<std::uint64_t>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(it->second.value)) {
    std::uint64_t v = 0;
    if (!parse_number(item, v)) throw ConfigError(context(key) + ": bad list element '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void ConfigFile::reject_unknown(const std::string& section, const std::vector<std::string>& known) const {
  const std::string prefix = section.empty() ? "" : section + ".";
  for (const auto& [key, entry] : entries_) {
    if (key.compare(0, prefix.size(), prefix) != 0) continue;
    const std::string leaf = key.substr(prefix.size());
    if (!section.empty() && leaf.find('.') != std::string::npos) continue;
    if (section.empty() && key.find('.') != std::string::npos) continue;
    if (std::find(known.begin(), known.end(), leaf) == known.end()) {
      throw ConfigError(source_ + ":" + std::to_string(entry.line) + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace reacritic
