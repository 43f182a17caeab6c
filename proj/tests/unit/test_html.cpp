#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "textmill/html.hpp"

using namespace textmill;
using namespace textmill::html;
namespace fs = std::filesystem;

namespace {

void check_golden_dir(const fs::path& dir, bool full) {
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".html") inputs.push_back(e.path());
  std::sort(inputs.begin(), inputs.end());
  REQUIRE(!inputs.empty());
  for (const auto& in : inputs) {
    auto expected_path = in;
    expected_path.replace_extension(".expected.txt");
    const std::string body = testing::read_file(in);
    std::string expected = testing::read_file(expected_path);
    if (!expected.empty() && expected.back() == '\n') expected.pop_back();
    const std::string got = full ? html_to_text(body) : extract_text(parse_html(body));
    INFO("fixture: ", in.filename().string());
    CHECK(got == expected);
  }
}

// Sorted copies of the published tag lists.
const std::vector<std::string> kBlock = {
    "address", "article", "aside", "blockquote", "body", "br", "button", "canvas", "caption", "col",
    "colgroup", "dd", "div", "dl", "dt", "embed", "fieldset", "figcaption", "figure", "footer",
    "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hgroup", "hr",
    "li", "map", "noscript", "object", "ol", "output", "p", "pre", "progress", "section",
    "table", "tbody", "textarea", "tfoot", "th", "thead", "tr", "ul", "video"};
const std::vector<std::string> kInline = {"address", "cite", "details", "datalist", "iframe", "img",
                                          "input", "label", "legend", "optgroup", "q", "select",
                                          "summary", "tbody", "td", "time"};

DomNode random_tree(std::mt19937& rng, int depth) {
  static const std::vector<std::string> tags = {"div", "p", "span", "cite", "b", "li", "h1", "td", "q", "br"};
  static const std::vector<std::string> words = {"alpha", "b", " ", "  x ", "\n", "\t y", "zz z", ""};
  std::vector<DomNode> children;
  const int n = std::uniform_int_distribution<int>(0, 4)(rng);
  for (int i = 0; i < n; ++i) {
    if (depth > 0 && rng() % 2 == 0)
      children.push_back(random_tree(rng, depth - 1));
    else
      children.push_back(DomNode::text(words[rng() % words.size()]));
  }
  return DomNode::element(tags[rng() % tags.size()], std::move(children));
}

bool is_subsequence(const std::string& needle, const std::string& hay) {
  std::size_t j = 0;
  for (char c : hay)
    if (j < needle.size() && needle[j] == c) ++j;
  return j == needle.size();
}

std::string strip_ws(const std::string& s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\n' && c != '\t' && c != '\r') out += c;
  return out;
}

}  // namespace

TEST_CASE("golden extraction suite") {
  check_golden_dir(testing::fixture_dir() / "html" / "extract", false);
}

TEST_CASE("golden full conversion suite") {
  check_golden_dir(testing::fixture_dir() / "html" / "full", true);
}

TEST_CASE("classify_tag matches the published lists") {
  CHECK(kBlock.size() == 49);
  CHECK(kInline.size() == 16);
  for (const auto& t : kBlock) CHECK_MESSAGE(classify_tag(t) == TagClass::block, t);
  for (const auto& t : kInline) {
    if (t == "address" || t == "tbody") continue;
    CHECK_MESSAGE(classify_tag(t) == TagClass::inline_, t);
  }
  CHECK(classify_tag("b") == TagClass::other);
  CHECK(classify_tag("span") == TagClass::other);
  std::set<std::string> block(block_tags().begin(), block_tags().end());
  std::set<std::string> inl(inline_tags().begin(), inline_tags().end());
  CHECK(block == std::set<std::string>(kBlock.begin(), kBlock.end()));
  CHECK(inl == std::set<std::string>(kInline.begin(), kInline.end()));
}

TEST_CASE("parse_html basics") {
  auto dom = parse_html("<p>hi</p>");
  CHECK(dom.tag == kDocumentTag);
  REQUIRE(dom.children.size() == 1);
  CHECK(dom.children[0] == DomNode::element("p", {DomNode::text("hi")}));

  auto two = parse_html("<p>a<p>b");
  REQUIRE(two.children.size() == 2);
  CHECK(two.children[0].tag == "p");
  CHECK(two.children[1].tag == "p");

  auto bad = parse_html("<p>x\xff\xfey</p>");
  CHECK(text_content(bad).find("\xEF\xBF\xBD") != std::string::npos);

  CHECK(extract_text(parse_html("")) == "");
  CHECK(extract_text(DomNode::element(std::string(kDocumentTag))) == "");
}

TEST_CASE("minify rules") {
  CHECK(html_to_text("<div><script>x=1</script></div>") == "");
  CHECK(minify(parse_html("<div><script>x=1</script></div>")).children.empty());

  const std::string seventy(70, 'a');
  auto kept = parse_html("<div><p>" + seventy + "</p></div>");
  CHECK(minify(kept) == kept);

  const std::string two_hundred(200, 'h');
  CHECK(html_to_text("<header>" + two_hundred + "</header>") == "");

  // Threshold counts code points, not bytes: 63 two-byte letters are still short.
  std::string short_multi;
  for (int i = 0; i < 63; ++i) short_multi += "\xC3\xA9";
  CHECK(html_to_text("<p>" + short_multi + "</p>") == "");
  CHECK(html_to_text("<p>" + short_multi + "e</p>") == short_multi + "e");
}

TEST_CASE("extract_text invariants on random trees") {
  std::mt19937 rng(12345);
  for (int iter = 0; iter < 2000; ++iter) {
    DomNode root = DomNode::element(std::string(kDocumentTag), {random_tree(rng, 4)});
    const std::string out = extract_text(root);
    INFO("iteration ", iter);
    CHECK(out.find("\n\n") == std::string::npos);
    CHECK(out.find(" \n") == std::string::npos);
    CHECK(is_subsequence(strip_ws(out), strip_ws(text_content(root))));
    const DomNode once = minify(root);
    CHECK(minify(once) == once);
  }
}

TEST_CASE("charset handling") {
  CHECK(decode_body("caf\xE9", std::string("iso-8859-1")) == "caf\xC3\xA9");
  CHECK(decode_body("caf\xC3\xA9", std::nullopt) == "caf\xC3\xA9");
  CHECK(decode_body("<meta charset=\"windows-1252\">\x80", std::nullopt).find("\xE2\x82\xAC") != std::string::npos);
}
