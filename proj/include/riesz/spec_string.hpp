#pragma once

#include <map>
#include <string>

namespace riesz {

/// "kind:key=value,key=value" as used for weight and Young-function specs.
struct SpecString {
  std::string kind;
  std::map<std::string, std::string> args;

  static SpecString parse(const std::string& text);

  bool has(const std::string& key) const { return args.count(key) != 0; }
  /// Throws std::invalid_argument when missing or not a full number.
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  /// Throws when a key outside `allowed` (comma separated) is present.
  void requireOnly(const std::string& allowed) const;
};

}  // namespace riesz
