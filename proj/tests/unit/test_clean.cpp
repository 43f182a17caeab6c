#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "textmill/clean.hpp"
#include "textmill/unicode.hpp"

using namespace textmill;
using namespace textmill::clean;

namespace {

Document doc(std::string id, std::string text, Meta meta = Meta::object()) {
  return Document{std::move(id), std::move(text), std::move(meta)};
}

Document with_url(std::string id, std::string url, std::string text = "t") {
  Meta m = Meta::object();
  m["url"] = std::move(url);
  return doc(std::move(id), std::move(text), std::move(m));
}

std::string random_lines(std::mt19937& rng, const std::vector<std::string>& pool, int max_lines) {
  std::string out;
  const int n = static_cast<int>(rng() % (max_lines + 1));
  for (int i = 0; i < n; ++i) {
    if (i) out += '\n';
    out += pool[rng() % pool.size()];
  }
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  for (auto l : split_lines(text)) out.emplace_back(l);
  return out;
}

}  // namespace

TEST_CASE("replace_newline_with_space") {
  CHECK(replace_newline_with_space("a\nb") == "a b");
  CHECK(replace_newline_with_space("\n\n") == "  ");
  CHECK(replace_newline_with_space("") == "");
}

TEST_CASE("pattern lists") {
  CHECK(code_substrings() == std::vector<std::string>{"{", "}", "[if", "<script"});
  CHECK(html_span_substrings() == std::vector<std::string>{"<span", "</span>", "<div", "<a", "</div>", "</a>", "br>"});
  CHECK(sanad_substrings().size() == 7);
  CHECK(wiki_mojibake_substrings() == std::vector<std::string>{"À À"});
  CHECK(en_wiktionary_phrases().size() == 17);
}

TEST_CASE("remove_lines_with_substrings") {
  CHECK(remove_lines_with_substrings("keep\nx <script y\nalso", code_substrings()) == "keep\nalso");
  CHECK(remove_lines_with_substrings("plain\ntext", code_substrings()) == "plain\ntext");
  CHECK(remove_lines_with_substrings("{\n}", code_substrings()) == "");
}

TEST_CASE("strip_substrings") {
  const std::vector<std::string> phrases = {"This entry needs audio files"};
  CHECK(strip_substrings("word. This entry needs audio files end", phrases) == "word.  end");
  CHECK(strip_substrings("nothing here", phrases) == "nothing here");
  const std::vector<std::string> ab = {"ab"};
  CHECK(strip_substrings("aabb", ab) == "");
  CHECK(strip_substrings("xabab", ab) == "x");
}

TEST_CASE("remove_low_stopword_lines") {
  const std::vector<std::string> sw = {"the", "of"};
  CHECK(remove_low_stopword_lines("w x y z", sw, 0.25) == "");
  CHECK(remove_low_stopword_lines("The x y z", sw, 0.25) == "The x y z");
  CHECK(remove_low_stopword_lines("a b c d\n\nthe of", sw, 0.25) == "\nthe of");
}

TEST_CASE("document predicates") {
  std::string fourteen, fifteen;
  for (int i = 0; i < 14; ++i) fourteen += "w ";
  fifteen = fourteen + "w";
  CHECK(!keep_min_words(doc("a", fourteen)));
  CHECK(keep_min_words(doc("a", fifteen)));
  CHECK(keep_min_bytes(doc("a", std::string(300, 'x')), 300));
  CHECK(!keep_min_bytes(doc("a", std::string(299, 'x')), 300));
  CHECK(!keep_nonempty(doc("a", "  \n ")));
  CHECK(keep_nonempty(doc("a", " x ")));
  CHECK(!keep_non_user_title(doc("a", "t", {{"title", "User:Bob"}})));
  CHECK(keep_non_user_title(doc("a", "t", {{"title", "Main page"}})));
  CHECK(!keep_text_type(doc("a", "t", {{"type", "image"}})));
  CHECK(keep_text_type(doc("a", "t", {{"type", "text"}})));
  CHECK(keep_text_type(doc("a", "t")));
}

TEST_CASE("dedup_template_lines basic cases") {
  const std::string line16 = "sixteen chars!!!";
  REQUIRE(line16.size() == 16);
  Dataset docs;
  for (int i = 0; i < 10; ++i) docs.push_back(doc(std::to_string(i), "body " + std::to_string(i) + "\n" + line16));
  auto out = dedup_template_lines(docs, {15, 10});
  REQUIRE(out.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(out[i].text == "body " + std::to_string(i));

  const std::string line14 = "fourteen chars";
  Dataset many;
  for (int i = 0; i < 100; ++i) many.push_back(doc(std::to_string(i), line14));
  CHECK(dedup_template_lines(many, {15, 10}) == many);

  Dataset pair = {doc("a", line16 + "\nx"), doc("b", line16 + "\ny")};
  auto out2 = dedup_template_lines(pair, {15, 2});
  CHECK(out2[0].text == "x");
  CHECK(out2[1].text == "y");
}

TEST_CASE("dedup_template_lines agrees with a brute-force counter") {
  std::mt19937 rng(11);
  std::vector<std::string> pool;
  for (int i = 0; i < 40; ++i) pool.push_back(std::string(5 + rng() % 20, char('a' + i % 26)) + std::to_string(i));
  pool.push_back("");
  pool.push_back("trailing space line   ");
  pool.push_back("trailing space line");
  for (int iter = 0; iter < 20; ++iter) {
    Dataset docs;
    for (int i = 0; i < 200; ++i) docs.push_back(doc(std::to_string(i), random_lines(rng, pool, 6)));
    const TemplateLineOptions opts{15, static_cast<std::size_t>(2 + rng() % 30)};
    std::map<std::string, std::size_t> counts;
    for (const auto& d : docs)
      for (auto l : split_lines(d.text)) ++counts[std::string(trim_trailing(l))];
    auto out = dedup_template_lines(docs, opts, 3);
    REQUIRE(out.size() == docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
      CHECK(out[i].id == docs[i].id);
      std::vector<std::string> expected;
      for (auto l : split_lines(docs[i].text)) {
        const std::string key(trim_trailing(l));
        const bool remove = unicode::length(key) >= opts.min_len && counts[key] >= opts.min_count;
        if (!remove) expected.emplace_back(l);
      }
      CHECK(lines_of(out[i].text) == (expected.empty() ? std::vector<std::string>{""} : expected));
    }
    CHECK(dedup_template_lines(out, opts) == out);
  }
}

TEST_CASE("remove_menu_lines") {
  Dataset docs;
  for (int i = 0; i < 100; ++i) {
    std::string text = "unique " + std::to_string(i);
    if (i < 2) text += "\nmenu twice";
    if (i == 5) text += "\nmenu once";
    docs.push_back(doc(std::to_string(i), text, {{"seed", "news.example"}}));
  }
  docs.push_back(doc("solo", "only line\nother", {{"url", "http://solo.example/x"}}));
  auto out = remove_menu_lines(docs, 0.01);
  CHECK(out[0].text == "unique 0");
  CHECK(out[1].text == "unique 1");
  CHECK(out[5].text == "unique 5\nmenu once");
  CHECK(out[100].text == "only line\nother");
  CHECK(remove_menu_lines(out, 0.01) == out);
  CHECK(domain_of(docs[100]) == "solo.example");
  CHECK(domain_of(docs[0]) == "news.example");
  CHECK(domain_of(doc("x", "y")) == "");
}

TEST_CASE("dedup_exact keys") {
  CHECK(normalize_text_key("a b.") == "ab");
  CHECK(normalize_text_key("A\tB!") == "ab");
  Dataset docs = {doc("1", "a b."), doc("2", "ab"), doc("3", "abc")};
  std::vector<std::string> removed;
  auto out = dedup_exact(docs, KeyKind::text, &removed);
  REQUIRE(out.size() == 2);
  CHECK(out[0].id == "1");
  CHECK(removed == std::vector<std::string>{"2"});

  Dataset urls = {with_url("1", "http://h/a?b=1"), with_url("2", "http://h/a?c=2"), with_url("3", "http://h/b")};
  CHECK(dedup_exact(urls, KeyKind::url).size() == 2);

  Dataset amp = {with_url("1", "http://h/x"), with_url("2", "http://h/x/amp"), with_url("3", "http://h/x/amp/?q=1")};
  CHECK(dedup_exact(amp, KeyKind::url_amp).size() == 1);
  CHECK(dedup_exact(amp, KeyKind::url).size() == 3);  // plain URL keys keep trailing slashes

  Dataset ids = {with_url("1", "http://h/p?id=4&x=1"), with_url("2", "http://h/p?new-id=4"),
                 with_url("3", "http://h/p?id=5"), with_url("4", "http://h/p?utm=z")};
  auto kept = dedup_exact(ids, KeyKind::url_keep_id);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].id == "1");
  CHECK(kept[1].id == "3");
  CHECK(kept[2].id == "4");
  CHECK(normalize_url("http://h/p?new-id=4&z=1", KeyKind::url_keep_id) == "http://h/p?id=4");

  Dataset no_url = {doc("1", "t"), doc("2", "t")};
  CHECK(dedup_exact(no_url, KeyKind::url).size() == 2);
}

TEST_CASE("dedup_exact properties") {
  std::mt19937 rng(8);
  const std::vector<std::string> pool = {"a b", "ab", "a, b", "c", "C", "d e f", ""};
  for (int iter = 0; iter < 200; ++iter) {
    Dataset docs;
    for (int i = 0; i < 30; ++i) docs.push_back(doc(std::to_string(i), pool[rng() % pool.size()]));
    auto out = dedup_exact(docs, KeyKind::text);
    CHECK(out.size() <= docs.size());
    std::set<std::string> keys;
    for (const auto& d : out) {
      const std::string key = normalize_text_key(d.text);
      if (!key.empty()) CHECK(keys.insert(key).second);  // keyless documents are always kept
    }
    CHECK(dedup_exact(out, KeyKind::text) == out);
    for (std::size_t i = 1; i < out.size(); ++i) CHECK(std::stoi(out[i - 1].id) < std::stoi(out[i].id));
  }
}

TEST_CASE("sort_concat_by_meta") {
  Dataset docs = {doc("x", "B", {{"id", 2}}), doc("y", "A", {{"id", 1}})};
  auto out = sort_concat_by_meta(docs, "id");
  REQUIRE(out.size() == 1);
  CHECK(out[0].text == "A\nB");
  CHECK(out[0].id == "y");
  Dataset numeric = {doc("a", "ten", {{"id", 10}}), doc("b", "nine", {{"id", 9}})};
  CHECK(sort_concat_by_meta(numeric, "id")[0].text == "nine\nten");
  Dataset one = {doc("a", "solo", {{"id", 1}})};
  CHECK(sort_concat_by_meta(one, "id") == one);
  Dataset missing = {doc("a", "t", {{"id", 1}}), doc("b", "u")};
  CHECK_THROWS_AS(sort_concat_by_meta(missing, "id"), FormatError);
}

TEST_CASE("cleaners are idempotent") {
  std::mt19937 rng(21);
  const std::vector<std::string> pool = {"x <script y", "plain words here", "{", "the of and", "À À mojibake",
                                         "", "This entry needs audio files", "a b c d"};
  const std::vector<std::string> sw = {"the", "of", "and"};
  for (int i = 0; i < 500; ++i) {
    const std::string t = random_lines(rng, pool, 8);
    auto f1 = remove_lines_with_substrings(t, code_substrings());
    CHECK(remove_lines_with_substrings(f1, code_substrings()) == f1);
    auto f2 = strip_substrings(t, en_wiktionary_phrases());
    CHECK(strip_substrings(f2, en_wiktionary_phrases()) == f2);
    auto f3 = remove_low_stopword_lines(t, sw, 0.3);
    CHECK(remove_low_stopword_lines(f3, sw, 0.3) == f3);
    auto f4 = replace_newline_with_space(t);
    CHECK(replace_newline_with_space(f4) == f4);
  }
}
