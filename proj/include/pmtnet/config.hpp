#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pmtnet {

struct ParamSpec {
  std::string key;            // config-file key; the flag is --key with '_' -> '-'
  std::string default_value;  // empty means "derived from other parameters"
  std::string help;
};

/// Parses `key = value` lines; '#' starts a comment. Throws ConfigError on a
/// line without '=' or a repeated key.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Resolved parameters of one command: defaults, then the config file, then flags.
class RunConfig {
 public:
  /// Throws ConfigError if the file or the flags name a key not in `specs`.
  static RunConfig resolve(const std::vector<ParamSpec>& specs, const std::map<std::string, std::string>& file,
                           const std::map<std::string, std::string>& flags);

  bool has(const std::string& key) const;  // true when the value is non-empty
  std::string str(const std::string& key) const;
  double real(const std::string& key) const;
  std::size_t size(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  std::vector<std::size_t> size_list(const std::string& key) const;
  std::vector<std::string> str_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace pmtnet
