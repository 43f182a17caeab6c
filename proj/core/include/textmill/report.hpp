#pragma once

#include <cstddef>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace textmill {

struct Tally {
  std::size_t docs_in = 0;
  std::size_t docs_out = 0;
  std::size_t bytes_in = 0;
  std::size_t bytes_out = 0;

  friend bool operator==(const Tally&, const Tally&) = default;
};

/// Accounting for one pipeline step.
struct StepReport {
  std::string step;
  std::string scope;  // "document" or "dataset"
  std::string kind;   // "cleaning" or "filtering"
  std::size_t docs_in = 0;
  std::size_t docs_out = 0;
  std::size_t bytes_in = 0;
  std::size_t bytes_out = 0;
  std::size_t docs_modified = 0;
  double wall_time_ms = 0.0;
  std::map<std::string, Tally> per_language;
  nlohmann::json details = nlohmann::json::object();

  /// include_timing=false drops wall_time_ms, leaving only deterministic fields.
  nlohmann::json to_json(bool include_timing = true) const;
  static StepReport from_json(const nlohmann::json& j);
};

}  // namespace textmill
