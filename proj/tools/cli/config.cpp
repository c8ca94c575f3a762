#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace mixlab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(text.c_str(), &end);
  return errno == 0 && end == text.c_str() + text.size() && std::isfinite(out);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

void check_range(const KeySpec& spec, double v) {
  if (v < spec.min || v > spec.max) {
    std::ostringstream msg;
    msg << "config key '" << spec.key << "' = " << v << " is outside [" << spec.min << ", "
        << spec.max << "]";
    throw ConfigError(msg.str());
  }
}

void validate(const KeySpec& spec, const std::string& value) {
  double v = 0.0;
  switch (spec.kind) {
    case ValueKind::Integer: {
      if (!parse_real(value, v) || v < 0.0 || v != std::floor(v) || v > 1.8e19)
        throw ConfigError("config key '" + spec.key + "' needs a nonnegative integer, got '" +
                          value + "'");
      check_range(spec, v);
      return;
    }
    case ValueKind::Real:
      if (!parse_real(value, v))
        throw ConfigError("config key '" + spec.key + "' needs a number, got '" + value + "'");
      check_range(spec, v);
      return;
    case ValueKind::RealOrAuto:
      if (value == "auto") return;
      if (!parse_real(value, v))
        throw ConfigError("config key '" + spec.key + "' needs a number or 'auto', got '" +
                          value + "'");
      check_range(spec, v);
      return;
    case ValueKind::RealList:
      if (value == "auto") return;
      for (const auto& part : split(value, ',')) {
        if (!parse_real(part, v))
          throw ConfigError("config key '" + spec.key + "' needs comma-separated numbers, got '" +
                            value + "'");
        check_range(spec, v);
      }
      return;
    case ValueKind::Choice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
        std::string options;
        for (const auto& c : spec.choices) options += (options.empty() ? "" : ", ") + c;
        throw ConfigError("config key '" + spec.key + "' must be one of {" + options + "}, got '" +
                          value + "'");
      }
      return;
    case ValueKind::Text:
      return;
  }
}

}  // namespace

Config Config::parse(const std::string& text, const Schema& schema) {
  std::map<std::string, std::string> given;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const bool known = std::any_of(schema.begin(), schema.end(),
                                   [&](const KeySpec& s) { return s.key == key; });
    if (!known) throw ConfigError("unknown config key '" + key + "'");
    if (!given.emplace(key, value).second)
      throw ConfigError("config key '" + key + "' given twice");
  }

  Config cfg;
  for (const auto& spec : schema) {
    const auto it = given.find(spec.key);
    const std::string value = it != given.end() ? it->second : spec.fallback;
    validate(spec, value);
    cfg.entries_.emplace_back(spec.key, value);
  }
  return cfg;
}

Config Config::load(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), schema);
}

const std::string& Config::raw(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw ConfigError("config key '" + key + "' is not part of this command");
}

double Config::real(const std::string& key) const {
  double v = 0.0;
  if (!parse_real(raw(key), v)) throw ConfigError("config key '" + key + "' is not a number");
  return v;
}

std::uint64_t Config::integer(const std::string& key) const {
  return static_cast<std::uint64_t>(real(key));
}

std::optional<double> Config::real_or_auto(const std::string& key) const {
  if (is_auto(key)) return std::nullopt;
  return real(key);
}

std::optional<std::vector<double>> Config::list(const std::string& key) const {
  if (is_auto(key)) return std::nullopt;
  std::vector<double> out;
  for (const auto& part : split(raw(key), ',')) {
    double v = 0.0;
    parse_real(part, v);
    out.push_back(v);
  }
  return out;
}

std::string describe(const Schema& schema) {
  std::ostringstream out;
  for (const auto& s : schema) {
    out << "  " << s.key << " (default " << s.fallback << ")";
    if (!s.doc.empty()) out << ": " << s.doc;
    out << '\n';
  }
  return out.str();
}

}  // namespace mixlab::cli
