#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gradsync/error.hpp"
#include "gradsync/experiments.hpp"

namespace gradsync::cli {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& kind, int line, const std::string& what)
      : Error("cli", kind + (line > 0 ? " at line " + std::to_string(line) : std::string()) + ": " + what),
        kind_(kind),
        line_(line) {}

  const std::string& kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }

 private:
  std::string kind_;
  int line_;
};

class UnknownKey : public ConfigError {
 public:
  UnknownKey(int line, const std::string& key) : ConfigError("UnknownKey", line, key) {}
};

class TypeError : public ConfigError {
 public:
  TypeError(int line, const std::string& what) : ConfigError("TypeError", line, what) {}
};

class MissingSection : public ConfigError {
 public:
  explicit MissingSection(const std::string& section) : ConfigError("MissingSection", 0, section) {}
};

/// Every error found in one parse, in line order.
class ConfigErrors : public Error {
 public:
  explicit ConfigErrors(std::vector<ConfigError> errors);
  const std::vector<ConfigError>& errors() const noexcept { return errors_; }

 private:
  std::vector<ConfigError> errors_;
};

struct Entry {
  std::string key;  // fully qualified
  std::string value;
  int line = 0;
};

/// Syntactically valid, key-checked config text; values are still strings.
struct RawConfig {
  std::vector<Entry> entries;
  std::optional<CampaignKind> kind;  // from campaign.kind
};

struct RunConfig {
  Campaign campaign;
  std::string potential_family = "quartic";
  double potential_a = 0.5;
  std::vector<double> potential_coeffs;
  std::size_t proxy_per_side = 8;
  double proxy_half_width = 1.5;
  std::vector<double> alphas{0.2, 0.1, 0.05};
  double slack = 0.4;
  double dt = 1e-3;  // step of the circle campaigns
  std::string output_dir = "out";

  /// Every key with its effective value, one `key=value` per line, in
  /// known_keys() order. This is what the config hash covers.
  std::string canonical() const;
  std::uint64_t hash() const;
  /// Rebuilds campaign.potential and campaign.proxy.grid from the fields above.
  void sync();
};

/// Recognised keys, "section.name", in a fixed order.
const std::vector<std::string>& known_keys();

std::optional<CampaignKind> parse_kind(const std::string& name);

/// `key = value` lines; `[section]` headers prefix the keys that follow, and
/// keys may also be fully qualified. `#` starts a comment. A bare
/// `campaign = <kind>` line is campaign.kind in any section. Throws ConfigErrors listing
/// every problem; with require_sections, potential, rng and campaign must
/// each appear.
RawConfig read_config(const std::string& text, bool require_sections = true);

/// Converts and stores every entry; throws ConfigErrors on bad values.
void apply(RunConfig& cfg, const RawConfig& raw);

/// read_config + apply onto the defaults of the campaign kind named in the
/// text (escape when absent).
RunConfig parse_config(const std::string& text, bool require_sections = true);

/// `key=value` overrides, same rules as config lines (line 0). All are set
/// before the potential is rebuilt, so their order does not matter.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments);
void apply_override(RunConfig& cfg, const std::string& assignment);

RunConfig default_config(CampaignKind kind);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a(const std::string& text);

}  // namespace gradsync::cli
