#include "riesz/spec_string.hpp"

#include <sstream>
#include <stdexcept>

namespace riesz {

SpecString SpecString::parse(const std::string& text) {
  SpecString s;
  const auto colon = text.find(':');
  s.kind = text.substr(0, colon);
  if (s.kind.empty()) throw std::invalid_argument("empty spec kind");
  if (colon == std::string::npos) return s;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key=value in '" + item + "'");
    s.args[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return s;
}

double SpecString::number(const std::string& key) const {
  auto it = args.find(key);
  if (it == args.end())
    throw std::invalid_argument(kind + ": missing parameter " + key);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.size())
    throw std::invalid_argument(kind + ": bad number for " + key);
  return v;
}

double SpecString::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

void SpecString::requireOnly(const std::string& allowed) const {
  const std::string padded = "," + allowed + ",";
  for (const auto& [k, v] : args)
    if (padded.find("," + k + ",") == std::string::npos)
      throw std::invalid_argument(kind + ": unknown parameter " + k);
}

}  // namespace riesz
