#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmill/arpa.hpp"
#include "textmill/document.hpp"
#include "textmill/tokenizer.hpp"

namespace textmill::quality {

inline constexpr std::size_t kDefaultMaxWordLen = 1000;
inline constexpr std::size_t kDefaultCharRepN = 10;
inline constexpr std::size_t kDefaultWordRepN = 5;

/// Removes URL-shaped tokens, control characters (line breaks excepted) and
/// tokens longer than `max_word_len` code points; collapses whitespace runs
/// within each line and trims the result.
std::string normalize_doc(std::string_view text, std::size_t max_word_len = kDefaultMaxWordLen);

bool is_url_token(std::string_view token) noexcept;

/// Tokens from `tokenizer`; for "vi", every 2- and 3-token window is appended
/// as a space-joined token (all bigrams first, then trigrams).
std::vector<std::string> tokenize_words(std::string_view text, std::string_view language,
                                        const WordTokenizer& tokenizer, bool lowercase = false);

struct RepetitionCounts {
  std::uint64_t distinct = 0;  // N
  std::uint64_t k = 0;
  std::uint64_t top = 0;       // numerator
  std::uint64_t total = 0;     // denominator
  double ratio() const noexcept { return total == 0 ? 0.0 : static_cast<double>(top) / static_cast<double>(total); }
};

/// Character n-gram counts over code points; k = floor(sqrt(N)).
RepetitionCounts char_repetition(std::string_view text, std::size_t n);
double char_repetition_ratio(std::string_view text, std::size_t n);

/// Sum of counts of word n-grams seen at least twice over all n-gram counts.
RepetitionCounts word_repetition(std::span<const std::string> tokens, std::size_t n);
double word_repetition_ratio(std::span<const std::string> tokens, std::size_t n);

class SpecialCharSet {
 public:
  /// Everything except letters, marks, digits, whitespace and . , ! ? ' " ; : - ( )
  static SpecialCharSet defaults() { return SpecialCharSet(); }
  /// Exactly the code points of `chars`.
  static SpecialCharSet of(std::string_view chars);

  bool contains(char32_t cp) const;
  bool is_default() const noexcept { return default_; }
  /// UTF-8 of the explicit set; empty for the default set.
  std::string chars() const;

 private:
  bool default_ = true;
  std::u32string chars_;  // sorted
};

double special_char_ratio(std::string_view text, const SpecialCharSet& set);

using WordSet = std::unordered_set<std::string>;

/// Fraction of tokens whose lowercase form is in `words`.
double closed_class_ratio(std::span<const std::string> tokens, const WordSet& words);
double flagged_word_ratio(std::span<const std::string> tokens, const WordSet& words);

struct LanguageGuess {
  std::string language = "und";
  double confidence = 0.0;
};

class LanguageScorer {
 public:
  virtual ~LanguageScorer() = default;
  virtual LanguageGuess identify(std::string_view text) const = 0;
};

/// Baseline: argmax over languages of the closed-word hit ratio of the
/// whitespace tokens. Ties go to the smallest language code.
class ClosedClassScorer final : public LanguageScorer {
 public:
  explicit ClosedClassScorer(std::map<std::string, WordSet> lists) : lists_(std::move(lists)) {}
  LanguageGuess identify(std::string_view text) const override;

 private:
  std::map<std::string, WordSet> lists_;
};

LanguageGuess langid_conf(std::string_view text, const LanguageScorer& scorer);

enum class Indicator { min_words, char_rep, word_rep, special, closed, flagged, langid, perplexity };
inline constexpr std::array<Indicator, 8> kIndicators = {
    Indicator::min_words, Indicator::char_rep, Indicator::word_rep, Indicator::special,
    Indicator::closed,    Indicator::flagged,  Indicator::langid,   Indicator::perplexity};

std::string_view to_string(Indicator ind) noexcept;
/// Accepts the names above plus the value-field aliases ("n_words", ...).
std::optional<Indicator> parse_indicator(std::string_view name) noexcept;

/// Thresholds for one language. An absent threshold disables its indicator.
struct FilterConfig {
  std::string language = "und";
  std::string tokenizer = "whitespace";
  std::size_t max_word_len = kDefaultMaxWordLen;

  std::optional<double> min_words;
  std::size_t char_rep_n = kDefaultCharRepN;
  std::optional<double> char_rep_max;
  std::size_t word_rep_n = kDefaultWordRepN;
  std::optional<double> word_rep_max;
  SpecialCharSet special_set;
  std::optional<double> special_max;
  WordSet closed_words;
  std::optional<double> closed_min;
  WordSet flagged_words;
  std::optional<double> flagged_max;
  std::optional<double> langid_min;
  std::optional<double> ppl_max;
  std::string lm_path;  // empty: no perplexity model

  std::optional<double> threshold(Indicator ind) const;
  void set_threshold(Indicator ind, std::optional<double> value);
  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct FilterValues {
  std::size_t n_words = 0;
  double char_rep_ratio = 0.0;
  double word_rep_ratio = 0.0;
  double special_ratio = 0.0;
  double closed_ratio = 0.0;
  double flagged_ratio = 0.0;
  double langid_conf = 0.0;
  std::string language = "und";
  std::optional<double> perplexity;  // undefined without a model or tokens

  std::optional<double> value(Indicator ind) const;
  friend bool operator==(const FilterValues&, const FilterValues&) = default;
};

struct Verdict {
  bool kept = true;
  std::vector<Indicator> failed;
};

/// Everything compute_values needs besides the thresholds. Models may be null.
struct Scorers {
  std::shared_ptr<const WordTokenizer> tokenizer;
  std::shared_ptr<const lm::ArpaModel> lm;
  std::shared_ptr<const LanguageScorer> langid;
};

FilterValues compute_values(const Document& doc, const FilterConfig& config, const Scorers& scorers);

/// Strict comparisons: values exactly at a cutoff are kept. Undefined values
/// never fail.
Verdict apply_filters(const FilterValues& values, const FilterConfig& config);

/// Per-language configs plus the models they reference, loaded once.
class FilterConfigSet {
 public:
  FilterConfigSet() = default;

  /// `base_dir` resolves relative word-list and model paths.
  static FilterConfigSet from_json(const nlohmann::json& j, const std::string& base_dir = ".");
  static FilterConfigSet load(const std::string& path);
  /// Word lists are written inline.
  nlohmann::json to_json() const;

  void add(FilterConfig config);
  /// Exact language, then "default"; nullptr if neither exists.
  const FilterConfig* find(std::string_view language) const;
  const FilterConfig& get(std::string_view language) const;
  const std::map<std::string, FilterConfig>& configs() const noexcept { return configs_; }
  Scorers scorers_for(const FilterConfig& config) const;

  /// Language from doc meta ("und" when absent).
  static std::string language_of(const Document& doc);

 private:
  void rebuild_langid();

  std::map<std::string, FilterConfig> configs_;
  std::map<std::string, std::shared_ptr<const lm::ArpaModel>> models_;
  std::shared_ptr<const LanguageScorer> langid_;
};

WordSet read_word_list(const std::string& path);

nlohmann::json to_json(const FilterValues& v);
nlohmann::json to_json(const Verdict& v);

}  // namespace textmill::quality
