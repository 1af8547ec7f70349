#include "pmtnet/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <sstream>

#include "pmtnet/errors.hpp"

namespace pmtnet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) throw ConfigError("config key '" + key + "' repeated");
  }
  return out;
}

RunConfig RunConfig::resolve(const std::vector<ParamSpec>& specs, const std::map<std::string, std::string>& file,
                             const std::map<std::string, std::string>& flags) {
  RunConfig cfg;
  for (const auto& s : specs) cfg.values_[s.key] = s.default_value;
  for (const auto* layer : {&file, &flags})
    for (const auto& [k, v] : *layer) {
      const auto it = cfg.values_.find(k);
      if (it == cfg.values_.end()) throw ConfigError("unknown parameter '" + k + "'");
      it->second = v;
    }
  return cfg;
}

bool RunConfig::has(const std::string& key) const {
  const auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

std::string RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("parameter '" + key + "' is not defined for this command");
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  const std::string v = str(key);
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno != 0) throw ConfigError("parameter '" + key + "' is not a number: '" + v + "'");
  return d;
}

std::uint64_t RunConfig::u64(const std::string& key) const {
  const std::string v = str(key);
  char* end = nullptr;
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno != 0 || v.front() == '-')
    throw ConfigError("parameter '" + key + "' is not a non-negative integer: '" + v + "'");
  return x;
}

std::size_t RunConfig::size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

std::vector<std::string> RunConfig::str_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream in(str(key));
  std::string item;
  while (std::getline(in, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

std::vector<std::size_t> RunConfig::size_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : str_list(key)) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(item.c_str(), &end, 10);
    if (*end != '\0' || item.front() == '-') throw ConfigError("parameter '" + key + "' has a bad entry '" + item + "'");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

}  // namespace pmtnet
