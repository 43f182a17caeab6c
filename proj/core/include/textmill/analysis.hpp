#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmill/document.hpp"
#include "textmill/report.hpp"
#include "textmill/tokenizer.hpp"

namespace textmill::analysis {

struct BoxStats {
  double median = 0;
  double q1 = 0;
  double q3 = 0;
  double whisker_low = 0;
  double whisker_high = 0;
  std::size_t outlier_count = 0;
  std::size_t count = 0;
};

/// Linear interpolation between order statistics (h = (n - 1) p).
double quantile(std::span<const double> sorted, double p);
/// Whiskers at the most extreme data points within 1.5 IQR of the quartiles.
BoxStats box_stats(std::vector<double> values);

/// Document sizes in UTF-8 bytes per language (meta "language", else "und").
std::map<std::string, BoxStats> size_stats(std::span<const Document> docs);

struct Histogram {
  std::vector<double> edges;   // bins + 1, ascending
  std::vector<std::size_t> counts;
  std::size_t undefined = 0;   // NaN or missing values, not binned
};

/// Equal-width bins over [min, max]; the last bin is closed. A degenerate
/// range is widened by a small epsilon so every value lands in bin 0.
Histogram value_histogram(std::span<const double> values, std::size_t bins);
Histogram value_histogram(std::span<const std::optional<double>> values, std::size_t bins);

/// Tokens per UTF-8 byte for each component (meta[component_key], else
/// "unknown"). Components with fewer than min_docs documents are left out.
std::map<std::string, double> fertility(std::span<const Document> docs, const WordTokenizer& tokenizer,
                                        const std::string& component_key = "source", std::size_t min_docs = 5);

struct RemovalRow {
  std::string step;
  std::string language;  // "*" for the whole step
  Tally tally;
  double docs_removed_pct = 0;
  double bytes_removed_pct = 0;
};

/// Per-step and per-language removed fractions relative to each step's input.
std::vector<RemovalRow> removal_report(std::span<const StepReport> steps);
void write_removal_csv(std::ostream& out, const std::vector<RemovalRow>& rows);
nlohmann::json to_json(const std::vector<RemovalRow>& rows);

nlohmann::json to_json(const BoxStats& b);
nlohmann::json to_json(const Histogram& h);

/// Summary used by the CLI: document count, bytes, size stats per language
/// and fertility for the whitespace tokenizer.
nlohmann::json corpus_summary(std::span<const Document> docs, std::size_t fertility_min_docs = 5);
void write_size_csv(std::ostream& out, const std::map<std::string, BoxStats>& stats);

}  // namespace textmill::analysis
