#include "textmill/tokenizer.hpp"

#include <map>
#include <mutex>

#include "textmill/errors.hpp"
#include "textmill/unicode.hpp"

namespace textmill {

std::vector<std::string> WhitespaceTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  for (auto t : unicode::split_whitespace(text)) out.emplace_back(t);
  return out;
}

std::vector<std::string> CharacterTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = unicode::next_code_point(text, pos);
    if (!unicode::is_whitespace(cp)) out.emplace_back(text.substr(start, pos - start));
  }
  return out;
}

std::vector<std::string> ByteTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  out.reserve(text.size());
  for (char c : text) out.emplace_back(1, c);
  return out;
}

namespace {

struct Registry {
  std::mutex mu;
  std::map<std::string, TokenizerFactory> factories;
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_tokenizer(const std::string& name, TokenizerFactory factory) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  r.factories[name] = std::move(factory);
}

std::shared_ptr<const WordTokenizer> make_tokenizer(const std::string& name) {
  if (name == "whitespace") return std::make_shared<WhitespaceTokenizer>();
  if (name == "character") return std::make_shared<CharacterTokenizer>();
  if (name == "byte") return std::make_shared<ByteTokenizer>();
  auto& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.factories.find(name);
  if (it == r.factories.end()) throw ConfigError("unknown tokenizer '" + name + "'");
  return it->second();
}

}  // namespace textmill
