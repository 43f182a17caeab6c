#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "textmill/errors.hpp"

namespace textmill::lm {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

/// OOV token and the model has no <unk>.
class VocabularyError : public Error {
 public:
  explicit VocabularyError(const std::string& token)
      : Error("token '" + token + "' is not in the model vocabulary"), token_(token) {}
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

struct NgramEntry {
  std::vector<std::uint32_t> words;  // vocabulary ids, oldest first
  double log10_prob = 0.0;
  std::optional<double> log10_backoff;
};

enum class BoundaryMode {
  sentence,  // condition on <s>, score every token and a final </s>
  none,      // score the tokens alone; no boundary symbols
};

/// Back-off n-gram model as read from an ARPA file. Immutable after loading
/// and safe to share between threads.
class ArpaModel {
 public:
  int max_order() const noexcept { return static_cast<int>(orders_.size()); }
  std::size_t count(int order) const { return orders_.at(static_cast<std::size_t>(order - 1)).entries.size(); }
  bool has_unk() const noexcept { return unk_.has_value(); }
  std::size_t vocab_size() const noexcept { return words_.size(); }
  bool in_vocab(std::string_view token) const;

  /// Entry for a token sequence, or nullptr.
  const NgramEntry* find(std::span<const std::string> ngram) const;

  /// Appends an entry; unigrams define the vocabulary, so they must be added
  /// before any higher-order n-gram that uses their words. Throws FormatError
  /// for duplicates, unknown words or a positive log10 probability.
  void add(std::span<const std::string> ngram, double log10_prob, std::optional<double> log10_backoff = std::nullopt);

  /// Log10 probability of `tokens` under standard back-off semantics.
  double score(std::span<const std::string> tokens, BoundaryMode mode = BoundaryMode::sentence) const;
  /// Number of scored positions for `tokens` under `mode`.
  static std::size_t scored_positions(std::size_t n_tokens, BoundaryMode mode) noexcept;
  /// 10^(-score / positions). Throws ConfigError for an empty token list in
  /// no-boundary mode.
  double perplexity(std::span<const std::string> tokens, BoundaryMode mode = BoundaryMode::sentence) const;

  /// Writes the model in ARPA layout; load_arpa of the output reproduces it.
  void write_arpa(std::ostream& out) const;

  friend bool operator==(const ArpaModel& a, const ArpaModel& b);

 private:
  struct Order {
    std::vector<NgramEntry> entries;
    std::unordered_map<std::string, std::size_t> index;  // packed ids -> entry
  };

  static std::string pack(std::span<const std::uint32_t> ids);
  const NgramEntry* find_ids(std::span<const std::uint32_t> ids) const;
  std::uint32_t lookup(std::string_view token) const;
  double conditional(std::span<const std::uint32_t> history, std::uint32_t word) const;

  std::vector<Order> orders_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> word_ids_;
  std::optional<std::uint32_t> unk_;
};

/// Parses standard ARPA text (\data\, "ngram N=count", \N-grams:, \end\).
/// Errors carry the offending line number.
ArpaModel load_arpa(std::istream& in);
ArpaModel load_arpa_file(const std::string& path);

}  // namespace textmill::lm
