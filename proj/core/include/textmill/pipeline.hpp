#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmill/document.hpp"
#include "textmill/errors.hpp"
#include "textmill/report.hpp"

namespace textmill {

enum class StepScope { document, dataset };
enum class StepKind { cleaning, filtering };

std::string_view to_string(StepScope s) noexcept;
std::string_view to_string(StepKind k) noexcept;

/// Log records a step emits for one document (e.g. PII redactions).
using StepLog = std::vector<nlohmann::json>;

/// A step with its parameters already validated and resources loaded.
/// Document-scoped steps set `apply_doc`, which edits the document in place
/// and returns false to drop it. Dataset-scoped steps set `apply_dataset`.
struct BoundStep {
  StepScope scope = StepScope::document;
  StepKind kind = StepKind::cleaning;
  std::function<bool(Document&, StepLog&)> apply_doc;
  std::function<Dataset(const Dataset&, std::size_t threads, nlohmann::json& details)> apply_dataset;
};

/// Reads step parameters and reports problems with their config path.
class ParamReader {
 public:
  ParamReader(const nlohmann::json& params, std::string path, std::string base_dir);

  std::size_t get_count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt);
  double get_real(const std::string& key, std::optional<double> fallback = std::nullopt);
  std::string get_string(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  bool has(const std::string& key) const { return params_.contains(key); }
  /// Inline string list under `key`, or one entry per line of the file named
  /// by `key` + "_file".
  std::vector<std::string> get_list(const std::string& key);
  /// Raw value; marks the key as consumed.
  const nlohmann::json& get_raw(const std::string& key);
  std::string resolve(const std::string& path) const;
  const std::string& path() const noexcept { return path_; }

  /// Throws ConfigError naming the first parameter that was never read.
  void finish() const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const nlohmann::json& params_;
  std::string path_;
  std::string base_dir_;
  std::vector<std::string> used_;
};

using StepFactory = std::function<BoundStep(ParamReader& params, const std::string& name)>;

/// Adds a step to the registry. `prefix` registrations match every name
/// beginning with `name` (used for language-suffixed steps).
void register_step(const std::string& name, StepFactory factory, bool prefix = false);
bool is_registered_step(const std::string& name);
/// Registered exact names, sorted.
std::vector<std::string> registered_steps();

struct StepSpec {
  std::string name;
  StepScope scope = StepScope::document;
  StepKind kind = StepKind::cleaning;
  nlohmann::json params = nlohmann::json::object();
};

class Pipeline {
 public:
  Pipeline() = default;

  /// {"steps":[{"name":..., "params":{...}}, ...]}. Unknown names and bad
  /// parameters throw ConfigError mentioning the offending path.
  static Pipeline from_json(const nlohmann::json& j, const std::string& base_dir = ".");
  static Pipeline parse(std::string_view source, const std::string& base_dir = ".");
  static Pipeline load(const std::string& path);

  const std::vector<StepSpec>& steps() const noexcept { return specs_; }
  nlohmann::json to_json() const;

  struct TraceEntry {
    std::string step;
    std::string text_before;
    std::string text_after;
    bool changed = false;
    bool removed = false;
  };

  struct Options {
    std::size_t threads = 1;
    /// Receives step log records in document order after each step.
    std::function<void(const nlohmann::json&)> log;
    /// Document id to follow through every step.
    std::optional<std::string> trace_id;
  };

  struct Result {
    Dataset docs;
    std::vector<StepReport> reports;
    std::vector<TraceEntry> trace;
  };

  /// Throws PipelineError when a step fails.
  Result run(Dataset docs, const Options& options) const;
  Result run(Dataset docs, std::size_t threads = 1) const;

 private:
  std::vector<StepSpec> specs_;
  std::vector<BoundStep> bound_;
};

class PipelineError : public Error {
 public:
  PipelineError(const std::string& what, std::string step, std::string doc_id, std::vector<StepReport> partial)
      : Error(what), step_(std::move(step)), doc_id_(std::move(doc_id)), partial_(std::move(partial)) {}

  const std::string& step() const noexcept { return step_; }
  /// Empty when the failure was not tied to one document.
  const std::string& doc_id() const noexcept { return doc_id_; }
  /// Reports of the steps that completed before the failure.
  const std::vector<StepReport>& partial_reports() const noexcept { return partial_; }

 private:
  std::string step_;
  std::string doc_id_;
  std::vector<StepReport> partial_;
};

nlohmann::json reports_to_json(const std::vector<StepReport>& reports, bool include_timing = true);

}  // namespace textmill
