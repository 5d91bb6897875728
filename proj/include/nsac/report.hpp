#pragma once
// Plain-text run summaries: stable "key = value" lines, no timestamps or
// machine noise, so identical runs write identical files.

#include <string>
#include <utility>
#include <vector>

namespace nsac {

using ReportLines = std::vector<std::pair<std::string, std::string>>;

inline std::string render_report(const ReportLines& entries) {
  std::string out;
  for (const auto& [key, value] : entries) out += key + " = " + value + "\n";
  return out;
}

}  // namespace nsac
