#pragma once

#include <map>
#include <string>
#include <vector>

namespace offload {

enum class Dimension { kNone, kBits, kHertz, kWatts, kSeconds, kText };

struct SchemaEntry {
  std::string key;
  Dimension dimension;
  std::string default_value;
  std::string description;
};

// Every key the loader accepts, with its base unit and default.
const std::vector<SchemaEntry>& config_schema();

// Parses "10 Mbit", "1 kHz", "1e-4 dBm", "0.5 s" or a bare number into the
// base unit of `dimension` (bit, Hz, W, s). dBm converts as 10^((x-30)/10) W.
double parse_quantity(const std::string& text, Dimension dimension);

// Flat section.key -> value map validated against config_schema().
// Files use INI syntax: [section] headers, key = value lines, ';' comments.
class Config {
 public:
  Config();  // schema defaults (desk scale)

  static Config from_file(const std::string& path);

  // Applies "section.key=value"; unknown keys throw ConfigError.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  double number(const std::string& key) const;
  long integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const SchemaEntry& entry(const std::string& key) const;

  std::map<std::string, std::string> values_;
};

}  // namespace offload
