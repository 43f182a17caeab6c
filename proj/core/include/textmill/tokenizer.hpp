#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace textmill {

/// Splits text into word tokens. Implementations must be thread safe.
class WordTokenizer {
 public:
  virtual ~WordTokenizer() = default;
  virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

/// Unicode-whitespace delimited tokens.
class WhitespaceTokenizer final : public WordTokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const override;
  std::string name() const override { return "whitespace"; }
};

/// One token per non-whitespace scalar value (fallback for unsegmented scripts).
class CharacterTokenizer final : public WordTokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const override;
  std::string name() const override { return "character"; }
};

/// One token per byte of the UTF-8 encoding, whitespace included.
class ByteTokenizer final : public WordTokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const override;
  std::string name() const override { return "byte"; }
};

using TokenizerFactory = std::function<std::shared_ptr<const WordTokenizer>()>;

/// Registers an external tokenizer (e.g. a subword segmenter) under `name`.
void register_tokenizer(const std::string& name, TokenizerFactory factory);
/// Built-ins: "whitespace", "character", "byte". Throws ConfigError otherwise.
std::shared_ptr<const WordTokenizer> make_tokenizer(const std::string& name);

}  // namespace textmill
