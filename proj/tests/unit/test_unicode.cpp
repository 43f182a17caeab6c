#include <doctest.h>

#include <random>

#include "textmill/errors.hpp"
#include "textmill/tokenizer.hpp"
#include "textmill/unicode.hpp"

using namespace textmill;
using namespace textmill::unicode;

TEST_CASE("decode and encode") {
  const std::string s = "a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x80";
  auto cps = decode(s);
  REQUIRE(cps.size() == 4);
  CHECK(cps[0] == U'a');
  CHECK(cps[1] == 0xE9);
  CHECK(cps[2] == 0x20AC);
  CHECK(cps[3] == 0x1F600);
  CHECK(encode(std::u32string(cps.begin(), cps.end())) == s);
  CHECK(length(s) == 4);
}

TEST_CASE("invalid sequences") {
  CHECK(!is_valid_utf8("\xFF"));
  CHECK(!is_valid_utf8("\xC3"));
  CHECK(!is_valid_utf8("\xED\xA0\x80"));  // surrogate
  CHECK(!is_valid_utf8("\xC0\xAF"));      // overlong
  CHECK(is_valid_utf8("plain \xC3\xA9"));
  CHECK(sanitize_utf8("a\xFF" "b") == "a\xEF\xBF\xBD" "b");
  std::size_t pos = 0;
  CHECK(next_code_point("\xE2\x82", pos) == kReplacementChar);
  CHECK(pos == 1);
}

TEST_CASE("sanitize always yields valid UTF-8") {
  std::mt19937 rng(99);
  for (int i = 0; i < 2000; ++i) {
    std::string bytes(rng() % 32, '\0');
    for (auto& c : bytes) c = static_cast<char>(rng() & 0xFF);
    const std::string clean = sanitize_utf8(bytes);
    CHECK(is_valid_utf8(clean));
    if (is_valid_utf8(bytes)) CHECK(clean == bytes);
  }
}

TEST_CASE("character properties") {
  CHECK(is_letter(U'a'));
  CHECK(is_letter(0x4E2D));
  CHECK(!is_letter(U'1'));
  CHECK(is_digit(U'7'));
  CHECK(is_digit(0x0663));
  CHECK(is_mark(0x0301));
  CHECK(is_whitespace(0x00A0));
  CHECK(is_whitespace(0x3000));
  CHECK(is_punctuation(U','));
  CHECK(is_punctuation(0x3002));
  CHECK(is_control(0x07));
  CHECK(!is_control(U'a'));
}

TEST_CASE("lowercase and whitespace split") {
  CHECK(to_lower("ÀB\xC3\x89") == "àb\xC3\xA9");
  auto parts = split_whitespace("  a b\tc\n\n ");
  REQUIRE(parts.size() == 3);
  CHECK(parts[0] == "a");
  CHECK(parts[1] == "b");
  CHECK(parts[2] == "c");
  CHECK(split_whitespace("").empty());
}

TEST_CASE("charset conversion") {
  CHECK(convert_to_utf8("\xE9t\xE9", "iso-8859-1") == std::optional<std::string>("\xC3\xA9t\xC3\xA9"));
  CHECK(!convert_to_utf8("x", "no-such-charset-xyz"));
}

TEST_CASE("tokenizers") {
  WhitespaceTokenizer ws;
  CHECK(ws.tokenize(" a  bb\nc ") == std::vector<std::string>{"a", "bb", "c"});
  CharacterTokenizer ch;
  CHECK(ch.tokenize("中 文") == std::vector<std::string>{"中", "文"});
  ByteTokenizer by;
  CHECK(by.tokenize("a b").size() == 3);
  CHECK(make_tokenizer("whitespace")->name() == "whitespace");
  CHECK_THROWS_AS(make_tokenizer("nope"), ConfigError);
  register_tokenizer("upper-split", [] { return std::make_shared<CharacterTokenizer>(); });
  CHECK(make_tokenizer("upper-split")->tokenize("ab").size() == 2);
}
