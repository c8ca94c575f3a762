#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mixlab::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueKind {
  Integer,     // nonnegative integer
  Real,
  RealOrAuto,  // real or the literal "auto"
  RealList,    // comma-separated reals, or "auto"
  Choice,      // one of `choices`
  Text,
};

struct KeySpec {
  std::string key;
  ValueKind kind = ValueKind::Real;
  std::string fallback;  // default, already in textual form
  double min = -1e308;
  double max = 1e308;
  std::vector<std::string> choices;
  std::string doc;
};

using Schema = std::vector<KeySpec>;

/// A flat key = value configuration resolved against a schema: unknown keys
/// are rejected, defaults filled in and every value range-checked.
class Config {
 public:
  static Config parse(const std::string& text, const Schema& schema);
  static Config load(const std::string& path, const Schema& schema);

  const std::string& raw(const std::string& key) const;
  double real(const std::string& key) const;
  std::uint64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(integer(key)); }
  /// nullopt for "auto".
  std::optional<double> real_or_auto(const std::string& key) const;
  std::optional<std::vector<double>> list(const std::string& key) const;
  bool is_auto(const std::string& key) const { return raw(key) == "auto"; }

  /// Resolved entries in schema order.
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string describe(const Schema& schema);

}  // namespace mixlab::cli
