#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xlra/engine.hpp"

namespace xlra {

/// Ordered key = value pairs. Later duplicates override earlier ones.
class KeyValues
{
  public:
    void set(const std::string& key, const std::string& value);
    const std::string* find(const std::string& key) const;
    bool erase(const std::string& key);
    const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

  private:
    std::vector<std::pair<std::string, std::string>> items_;
};

/**
 * Flat config text: `key = value` per line, blank lines and lines starting
 * with `#` or `;` ignored, `[section]` headers accepted and ignored.
 * Throws ConfigError on malformed lines.
 */
KeyValues parse_config_text(const std::string& text);

/// Recovers the configuration embedded as `# key = value` comment lines at
/// the top of a result file written by this tool.
KeyValues parse_embedded_config(const std::string& csv_text);

/// Reads a config file; result CSVs (first line starting with `#`) are read
/// through parse_embedded_config.
KeyValues load_config_file(const std::string& path);

/// Keys that may carry a list of values in sweeps.
bool is_grid_key(const std::string& key);

/// "a, b, c" or inclusive range "start:stop:step".
std::vector<double> parse_number_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);
std::vector<Protocol> parse_protocol_list(const std::string& text);

/// Applies every scalar key to `cfg`. Grid keys must hold a single value.
/// Unknown keys and unparsable values throw ConfigError.
void apply_config(TrialConfig& cfg, const KeyValues& kv);

/// Base config from the scalar keys, grids from protocol, K, B and delta
/// (each defaulting to the base value when absent).
SweepSpec make_sweep_spec(const KeyValues& kv);

/// Every key of `cfg` in canonical order; parse_config_text of the joined
/// lines reproduces `cfg` exactly.
std::vector<std::pair<std::string, std::string>> config_entries(const TrialConfig& cfg);

std::vector<std::string> config_lines(const std::vector<std::pair<std::string, std::string>>& entries);

} // namespace xlra
