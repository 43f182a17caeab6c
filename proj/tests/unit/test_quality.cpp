#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "textmill/quality.hpp"
#include "textmill/unicode.hpp"

using namespace textmill;
using namespace textmill::quality;

namespace {

struct Ratio {
  std::uint64_t num;
  std::uint64_t den;
};

// Brute-force top-k character n-gram share over code points.
Ratio char_rep_oracle(const std::string& text, std::size_t n) {
  const auto cps = unicode::decode(text);
  if (cps.size() < n) return {0, 0};
  std::map<std::u32string, std::uint64_t> counts;
  for (std::size_t i = 0; i + n <= cps.size(); ++i) ++counts[std::u32string(cps.begin() + i, cps.begin() + i + n)];
  std::vector<std::uint64_t> v;
  for (const auto& [g, c] : counts) v.push_back(c);
  std::sort(v.rbegin(), v.rend());
  std::size_t k = 0;
  while ((k + 1) * (k + 1) <= v.size()) ++k;
  const auto top = std::accumulate(v.begin(), v.begin() + static_cast<long>(k), std::uint64_t{0});
  return {top, std::accumulate(v.begin(), v.end(), std::uint64_t{0})};
}

Ratio word_rep_oracle(const std::vector<std::string>& tokens, std::size_t n) {
  if (tokens.size() < n) return {0, 0};
  std::map<std::vector<std::string>, std::uint64_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  Ratio r{0, 0};
  for (const auto& [g, c] : counts) {
    r.den += c;
    if (c >= 2) r.num += c;
  }
  return r;
}

std::string random_text(std::mt19937& rng, const std::string& alphabet, std::size_t max_len) {
  std::string s(rng() % (max_len + 1), ' ');
  for (auto& c : s) c = alphabet[rng() % alphabet.size()];
  return s;
}

FilterConfig all_thresholds() {
  FilterConfig c;
  c.min_words = 3;
  c.char_rep_max = 0.5;
  c.word_rep_max = 0.5;
  c.special_max = 0.3;
  c.closed_min = 0.1;
  c.flagged_max = 0.1;
  c.langid_min = 0.2;
  c.ppl_max = 1000;
  return c;
}

}  // namespace

TEST_CASE("normalize_doc") {
  CHECK(normalize_doc("a  b") == "a b");
  CHECK(normalize_doc("see http://x.y z") == "see z");
  CHECK(normalize_doc("abcdef ok", 5) == "ok");
  CHECK(normalize_doc("  a\x01\tb \n  c\x7f  ") == "a b\nc");
  CHECK(normalize_doc("x\x01y") == "xy");
  CHECK(normalize_doc("www.example.com/page text") == "text");
  CHECK(is_url_token("https://example.org/a?b=c"));
  CHECK(!is_url_token("hello"));
}

TEST_CASE("tokenize_words") {
  WhitespaceTokenizer ws;
  CHECK(tokenize_words("a b c", "en", ws) == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize_words("", "en", ws).empty());
  CHECK(tokenize_words("xin chào bạn", "vi", ws) ==
        std::vector<std::string>{"xin", "chào", "bạn", "xin chào", "chào bạn", "xin chào bạn"});
  CHECK(tokenize_words("The CAT", "en", ws, true) == std::vector<std::string>{"the", "cat"});
}

TEST_CASE("character repetition examples") {
  auto c = char_repetition("ok_ok_good_ok", 3);
  CHECK(c.distinct == 9);
  CHECK(c.k == 3);
  CHECK(c.top == 5);
  CHECK(c.total == 11);
  CHECK(char_repetition_ratio("aaaa", 3) == 1.0);
  CHECK(char_repetition_ratio("abcdef", 3) == 0.5);
  CHECK(char_repetition_ratio("ab", 3) == 0.0);
}

TEST_CASE("character repetition matches brute force") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 3000; ++i) {
    const std::string text = random_text(rng, i % 2 ? "ab" : "abcde _", 60);
    const std::size_t n = 1 + rng() % 5;
    const Ratio want = char_rep_oracle(text, n);
    const auto got = char_repetition(text, n);
    INFO("text=", text, " n=", n);
    CHECK(got.top == want.num);
    CHECK(got.total == want.den);
    const double r = got.ratio();
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    if (got.distinct > 0 && got.k == got.distinct) CHECK(r == 1.0);
  }
}

TEST_CASE("word repetition examples and oracle") {
  const std::vector<std::string> abab = {"a", "b", "a", "b", "a", "b"};
  CHECK(word_repetition_ratio(abab, 2) == 1.0);
  const std::vector<std::string> xyxyz = {"x", "y", "x", "y", "z"};
  CHECK(word_repetition_ratio(xyxyz, 2) == 0.5);
  const std::vector<std::string> distinct = {"p", "q", "r", "s"};
  CHECK(word_repetition_ratio(distinct, 1) == 0.0);
  CHECK(word_repetition_ratio(distinct, 5) == 0.0);

  std::mt19937 rng(5);
  const std::vector<std::string> vocab = {"a", "b", "c", "d"};
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::string> toks(rng() % 30);
    for (auto& t : toks) t = vocab[rng() % vocab.size()];
    const std::size_t n = 1 + rng() % 4;
    const Ratio want = word_rep_oracle(toks, n);
    const auto got = word_repetition(toks, n);
    CHECK(got.top == want.num);
    CHECK(got.total == want.den);
    // Bijective relabeling leaves the ratio unchanged.
    std::vector<std::string> relabeled;
    for (const auto& t : toks) relabeled.push_back("w_" + std::string(1, char('z' - (t[0] - 'a'))));
    CHECK(word_repetition_ratio(relabeled, n) == got.ratio());
  }
}

TEST_CASE("special characters") {
  auto bang = SpecialCharSet::of("!");
  CHECK(special_char_ratio("!!!", bang) == 1.0);
  CHECK(special_char_ratio("ab!!", bang) == 0.5);
  CHECK(special_char_ratio("", bang) == 0.0);
  auto def = SpecialCharSet::defaults();
  CHECK(!def.contains(U'a'));
  CHECK(!def.contains(U'7'));
  CHECK(!def.contains(U' '));
  CHECK(!def.contains(0x0301));
  for (char32_t c : std::u32string(U".,!?'\";:-()")) CHECK(!def.contains(c));
  CHECK(def.contains(U'#'));
  CHECK(def.contains(U'@'));
  CHECK(def.contains(0x1F600));
  CHECK(special_char_ratio("a\xF0\x9F\x98\x80", def) == 0.5);
}

TEST_CASE("closed class and flagged ratios") {
  const std::vector<std::string> toks = {"the", "cat", "sat", "on", "the", "mat"};
  CHECK(closed_class_ratio(toks, {"the", "on"}) == 0.5);
  CHECK(flagged_word_ratio(toks, {}) == 0.0);
  CHECK(closed_class_ratio(toks, {"the", "cat", "sat", "on", "mat"}) == 1.0);
  CHECK(closed_class_ratio({}, {"the"}) == 0.0);
  const std::vector<std::string> upper = {"The", "ON"};
  CHECK(closed_class_ratio(upper, {"the", "on"}) == 1.0);
}

TEST_CASE("baseline language scorer") {
  ClosedClassScorer en({{"en", {"the", "of", "and"}}});
  auto g = langid_conf("the of and the", en);
  CHECK(g.language == "en");
  CHECK(g.confidence == 1.0);
  auto e = langid_conf("", en);
  CHECK(e.language == "und");
  CHECK(e.confidence == 0.0);
  CHECK(langid_conf("zzz yyy", en).confidence == 0.0);

  ClosedClassScorer two({{"en", {"the"}}, {"fr", {"le", "la"}}});
  auto fr = langid_conf("le chat la the", two);
  CHECK(fr.language == "fr");
  CHECK(fr.confidence == 0.5);
}

TEST_CASE("compute_values") {
  FilterConfig c;
  c.language = "en";
  c.closed_words = {"the"};
  Scorers s{std::make_shared<WhitespaceTokenizer>(), nullptr,
            std::make_shared<ClosedClassScorer>(std::map<std::string, WordSet>{{"en", {"the"}}})};
  Document d{"1", "the cat", Meta::object()};
  auto v = compute_values(d, c, s);
  CHECK(v.n_words == 2);
  CHECK(v.closed_ratio == 0.5);
  CHECK(v.langid_conf == 0.5);
  CHECK(v.language == "en");
  CHECK(!v.perplexity);
  CHECK(compute_values(d, c, s) == v);

  auto empty = compute_values(Document{"2", "", Meta::object()}, c, s);
  CHECK(empty.n_words == 0);
  CHECK(empty.char_rep_ratio == 0.0);
  CHECK(empty.word_rep_ratio == 0.0);
  CHECK(empty.special_ratio == 0.0);
  CHECK(empty.closed_ratio == 0.0);
  CHECK(!empty.perplexity);

  Scorers none;
  CHECK_THROWS(compute_values(d, c, none));
}

TEST_CASE("apply_filters directions") {
  FilterConfig c;
  c.min_words = 15;
  FilterValues v;
  v.n_words = 10;
  auto r = apply_filters(v, c);
  CHECK(!r.kept);
  CHECK(r.failed == std::vector<Indicator>{Indicator::min_words});

  FilterConfig all = all_thresholds();
  FilterValues inside;
  inside.n_words = 10;
  inside.char_rep_ratio = 0.1;
  inside.word_rep_ratio = 0.1;
  inside.special_ratio = 0.1;
  inside.closed_ratio = 0.5;
  inside.flagged_ratio = 0.0;
  inside.langid_conf = 0.9;
  inside.perplexity = 50;
  CHECK(apply_filters(inside, all).kept);

  FilterValues edge = inside;
  edge.char_rep_ratio = 0.5;  // exactly at the cutoff
  edge.n_words = 3;
  CHECK(apply_filters(edge, all).kept);

  FilterValues two = inside;
  two.flagged_ratio = 0.9;
  two.char_rep_ratio = 0.9;
  auto rv = apply_filters(two, all);
  CHECK(!rv.kept);
  CHECK(rv.failed == std::vector<Indicator>{Indicator::char_rep, Indicator::flagged});

  FilterValues undefined_ppl = inside;
  undefined_ppl.perplexity.reset();
  CHECK(apply_filters(undefined_ppl, all).kept);
}

TEST_CASE("relaxing a threshold never removes a kept document") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    FilterValues v;
    v.n_words = rng() % 20;
    v.char_rep_ratio = u(rng);
    v.word_rep_ratio = u(rng);
    v.special_ratio = u(rng);
    v.closed_ratio = u(rng);
    v.flagged_ratio = u(rng);
    v.langid_conf = u(rng);
    v.perplexity = 1 + 2000 * u(rng);
    FilterConfig c = all_thresholds();
    c.min_words = static_cast<double>(rng() % 20);
    for (auto ind : kIndicators) {
      if (ind == Indicator::min_words) continue;
      c.set_threshold(ind, ind == Indicator::perplexity ? 1 + 2000 * u(rng) : u(rng));
    }
    const Verdict before = apply_filters(v, c);
    CHECK(before.kept == before.failed.empty());
    const Indicator ind = kIndicators[rng() % kIndicators.size()];
    FilterConfig relaxed = c;
    const bool is_min = ind == Indicator::min_words || ind == Indicator::closed || ind == Indicator::langid;
    const double cur = *c.threshold(ind);
    relaxed.set_threshold(ind, is_min ? cur * u(rng) : std::min(ind == Indicator::perplexity ? 1e9 : 1.0, cur + u(rng)));
    if (before.kept) CHECK(apply_filters(v, relaxed).kept);
    CHECK(apply_filters(v, relaxed).failed.size() <= before.failed.size());
  }
}

TEST_CASE("tightening everything removes every non-empty document") {
  FilterConfig c;
  c.min_words = std::numeric_limits<double>::infinity();
  c.char_rep_max = 0;
  c.word_rep_max = 0;
  c.special_max = 0;
  c.flagged_max = 0;
  c.closed_min = 1;
  c.langid_min = 1;
  Scorers s{std::make_shared<WhitespaceTokenizer>(), nullptr, nullptr};
  for (const char* text : {"a", "hello world", "ok ok ok"}) {
    auto v = compute_values(Document{"x", text, Meta::object()}, c, s);
    CHECK(!apply_filters(v, c).kept);
  }
}

TEST_CASE("config files") {
  testing::TempDir dir("quality");
  testing::write_file(dir.path() / "flagged_en.txt", "Bad\nworse\n\n");
  testing::write_file(dir.path() / "filters.json", R"({
    "en": {"min_words": 3, "char_rep": {"n": 4, "max_ratio": 0.3},
           "closed": {"words": ["the", "of"], "min_ratio": 0.1},
           "flagged": {"words_file": "flagged_en.txt", "max_ratio": 0.05},
           "special": {"chars": "#@", "max_ratio": 0.2}},
    "default": {"min_words": 1}
  })");
  auto set = FilterConfigSet::load((dir.path() / "filters.json").string());
  const auto& en = set.get("en");
  CHECK(en.min_words == 3.0);
  CHECK(en.char_rep_n == 4);
  CHECK(en.word_rep_n == kDefaultWordRepN);
  CHECK(en.flagged_words == WordSet{"bad", "worse"});
  CHECK(en.special_set.contains(U'#'));
  CHECK(!en.special_set.contains(U'!'));
  CHECK(set.find("fr") == set.find("default"));
  CHECK(set.find("fr") != nullptr);

  auto round = FilterConfigSet::from_json(set.to_json());
  CHECK(round.to_json() == set.to_json());

  CHECK_THROWS_AS(FilterConfigSet::from_json(nlohmann::json::parse(R"({"en": {"char_rep": {"max_ratio": 1.5}}})")),
                  ConfigError);
  CHECK_THROWS_AS(FilterConfigSet::from_json(nlohmann::json::parse(R"({"en": {"tokenizer": "nope"}})")), ConfigError);
  CHECK_THROWS_AS(FilterConfigSet::from_json(nlohmann::json::parse(R"({"EN": {}})")), ConfigError);
  CHECK_THROWS_AS(FilterConfigSet::load((dir.path() / "missing.json").string()), ConfigError);

  Document d{"1", "x", Meta::object()};
  CHECK(FilterConfigSet::language_of(d) == "und");
  d.meta["language"] = "fr";
  CHECK(FilterConfigSet::language_of(d) == "fr");
}

TEST_CASE("indicator names") {
  for (auto ind : kIndicators) CHECK(parse_indicator(to_string(ind)) == ind);
  CHECK(parse_indicator("n_words") == Indicator::min_words);
  CHECK(!parse_indicator("bogus"));
}
