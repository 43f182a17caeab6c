#include "textmill/html.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>
#include <unordered_set>

#include "textmill/unicode.hpp"

namespace textmill::html {

namespace {

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_alnum(char c) { return is_alpha(c) || (c >= '0' && c <= '9'); }
char lower_ascii(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower_ascii(c);
  return out;
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (lower_ascii(s[pos + i]) != prefix[i]) return false;
  return true;
}

const std::unordered_set<std::string_view>& void_elements() {
  static const std::unordered_set<std::string_view> set = {
      "area", "base", "br", "col", "embed", "hr", "img", "input", "keygen",
      "link", "meta", "param", "source", "track", "wbr"};
  return set;
}

const std::unordered_map<std::string_view, char32_t>& named_entities() {
  static const std::unordered_map<std::string_view, char32_t> table = [] {
    std::unordered_map<std::string_view, char32_t> t = {
        {"amp", U'&'},      {"lt", U'<'},       {"gt", U'>'},        {"quot", U'"'},
        {"apos", U'\''},    {"hellip", 0x2026}, {"mdash", 0x2014},   {"ndash", 0x2013},
        {"lsquo", 0x2018},  {"rsquo", 0x2019},  {"sbquo", 0x201A},   {"ldquo", 0x201C},
        {"rdquo", 0x201D},  {"bdquo", 0x201E},  {"bull", 0x2022},    {"euro", 0x20AC},
        {"trade", 0x2122},  {"dagger", 0x2020}, {"Dagger", 0x2021},  {"permil", 0x2030},
        {"lsaquo", 0x2039}, {"rsaquo", 0x203A}, {"OElig", 0x152},    {"oelig", 0x153},
        {"Scaron", 0x160},  {"scaron", 0x161},  {"Yuml", 0x178},     {"fnof", 0x192},
        {"circ", 0x2C6},    {"tilde", 0x2DC},   {"ensp", 0x2002},    {"emsp", 0x2003},
        {"thinsp", 0x2009}, {"zwnj", 0x200C},   {"zwj", 0x200D},     {"lrm", 0x200E},
        {"rlm", 0x200F},    {"larr", 0x2190},   {"rarr", 0x2192},    {"uarr", 0x2191},
        {"darr", 0x2193},   {"harr", 0x2194},   {"minus", 0x2212},   {"infin", 0x221E},
        {"ne", 0x2260},     {"le", 0x2264},     {"ge", 0x2265},      {"asymp", 0x2248},
        {"alpha", 0x3B1},   {"beta", 0x3B2},    {"gamma", 0x3B3},    {"delta", 0x3B4},
        {"pi", 0x3C0},      {"sigma", 0x3C3},   {"mu", 0x3BC},       {"omega", 0x3C9},
    };
    // HTML 4 Latin-1 entities, U+00A0..U+00FF in code point order.
    static constexpr std::string_view latin1[] = {
        "nbsp",   "iexcl",  "cent",   "pound",  "curren", "yen",    "brvbar", "sect",
        "uml",    "copy",   "ordf",   "laquo",  "not",    "shy",    "reg",    "macr",
        "deg",    "plusmn", "sup2",   "sup3",   "acute",  "micro",  "para",   "middot",
        "cedil",  "sup1",   "ordm",   "raquo",  "frac14", "frac12", "frac34", "iquest",
        "Agrave", "Aacute", "Acirc",  "Atilde", "Auml",   "Aring",  "AElig",  "Ccedil",
        "Egrave", "Eacute", "Ecirc",  "Euml",   "Igrave", "Iacute", "Icirc",  "Iuml",
        "ETH",    "Ntilde", "Ograve", "Oacute", "Ocirc",  "Otilde", "Ouml",   "times",
        "Oslash", "Ugrave", "Uacute", "Ucirc",  "Uuml",   "Yacute", "THORN",  "szlig",
        "agrave", "aacute", "acirc",  "atilde", "auml",   "aring",  "aelig",  "ccedil",
        "egrave", "eacute", "ecirc",  "euml",   "igrave", "iacute", "icirc",  "iuml",
        "eth",    "ntilde", "ograve", "oacute", "ocirc",  "otilde", "ouml",   "divide",
        "oslash", "ugrave", "uacute", "ucirc",  "uuml",   "yacute", "thorn",  "yuml"};
    for (std::size_t i = 0; i < std::size(latin1); ++i) t.emplace(latin1[i], static_cast<char32_t>(0xA0 + i));
    return t;
  }();
  return table;
}

// Decodes character references in a text run.
std::string decode_entities(std::string_view s) {
  if (s.find('&') == std::string_view::npos) return std::string(s);
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    if (i + 1 < s.size() && s[i + 1] == '#') {
      std::size_t j = i + 2;
      int base = 10;
      if (j < s.size() && (s[j] == 'x' || s[j] == 'X')) {
        base = 16;
        ++j;
      }
      const std::size_t digits_start = j;
      while (j < s.size() && (base == 16 ? std::isxdigit(static_cast<unsigned char>(s[j])) != 0
                                         : (s[j] >= '0' && s[j] <= '9')))
        ++j;
      if (j > digits_start) {
        std::uint32_t value = 0;
        auto [p, ec] = std::from_chars(s.data() + digits_start, s.data() + j, value, base);
        char32_t cp = unicode::kReplacementChar;
        if (ec == std::errc() && value > 0 && value <= 0x10FFFF && !(value >= 0xD800 && value <= 0xDFFF))
          cp = static_cast<char32_t>(value);
        unicode::append_utf8(out, cp);
        i = (j < s.size() && s[j] == ';') ? j + 1 : j;
        continue;
      }
      out.push_back(s[i++]);
      continue;
    }
    std::size_t j = i + 1;
    while (j < s.size() && is_alnum(s[j]) && j - i <= 32) ++j;
    const std::string_view name = s.substr(i + 1, j - i - 1);
    const auto& table = named_entities();
    auto it = table.find(name);
    const bool terminated = j < s.size() && s[j] == ';';
    const bool legacy = name == "amp" || name == "lt" || name == "gt" || name == "quot" || name == "nbsp";
    if (it != table.end() && (terminated || legacy)) {
      unicode::append_utf8(out, it->second);
      i = terminated ? j + 1 : j;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

bool is_raw_text(std::string_view tag) { return tag == "script" || tag == "style"; }
bool is_rcdata(std::string_view tag) { return tag == "textarea" || tag == "title"; }

const std::unordered_set<std::string_view>& self_closing_siblings() {
  static const std::unordered_set<std::string_view> set = {"p", "li", "tr", "td", "th", "dt", "dd", "option"};
  return set;
}

class TreeBuilder {
 public:
  TreeBuilder() { stack_.push_back(DomNode::element(std::string(kDocumentTag))); }

  void text(std::string content) {
    if (content.empty()) return;
    auto& kids = stack_.back().children;
    if (!kids.empty() && kids.back().is_text())
      kids.back().content += content;
    else
      kids.push_back(DomNode::text(std::move(content)));
  }

  void open(std::string tag, bool self_closing) {
    if (self_closing_siblings().count(tag)) close_same_sibling(tag);
    if (void_elements().count(tag) || self_closing) {
      stack_.back().children.push_back(DomNode::element(std::move(tag)));
      return;
    }
    stack_.push_back(DomNode::element(std::move(tag)));
  }

  void close(std::string_view tag) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i].tag == tag) {
        while (stack_.size() > i) pop();
        return;
      }
    }
  }

  DomNode finish() {
    while (stack_.size() > 1) pop();
    return std::move(stack_.front());
  }

 private:
  void pop() {
    DomNode node = std::move(stack_.back());
    stack_.pop_back();
    stack_.back().children.push_back(std::move(node));
  }

  // An open element of the same tag is closed unless a block container
  // (or a table cell) sits between it and the insertion point.
  void close_same_sibling(std::string_view tag) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const std::string& t = stack_[i].tag;
      if (t == tag) {
        while (stack_.size() > i) pop();
        return;
      }
      if (classify_tag(t) == TagClass::block || t == "td" || t == "th") return;
    }
  }

  std::vector<DomNode> stack_;
};

DomNode parse_decoded(std::string_view s) {
  TreeBuilder tb;
  std::size_t i = 0;
  std::size_t text_start = 0;
  auto flush_text = [&](std::size_t end) {
    if (end > text_start) tb.text(decode_entities(s.substr(text_start, end - text_start)));
  };
  while (i < s.size()) {
    if (s[i] != '<') {
      ++i;
      continue;
    }
    // Comment.
    if (s.compare(i, 4, "<!--") == 0) {
      flush_text(i);
      const std::size_t end = s.find("-->", i + 4);
      i = end == std::string_view::npos ? s.size() : end + 3;
      text_start = i;
      continue;
    }
    // Doctype, CDATA, processing instruction, bogus comment.
    if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
      flush_text(i);
      if (s.compare(i, 9, "<![CDATA[") == 0) {
        const std::size_t end = s.find("]]>", i + 9);
        i = end == std::string_view::npos ? s.size() : end + 3;
      } else {
        const std::size_t end = s.find('>', i + 2);
        i = end == std::string_view::npos ? s.size() : end + 1;
      }
      text_start = i;
      continue;
    }
    const bool closing = i + 1 < s.size() && s[i + 1] == '/';
    const std::size_t name_start = i + (closing ? 2 : 1);
    if (name_start >= s.size() || !is_alpha(s[name_start])) {
      if (closing && name_start < s.size() && s[name_start] == '>') {
        flush_text(i);
        i = name_start + 1;
        text_start = i;
        continue;
      }
      ++i;  // literal '<'
      continue;
    }
    flush_text(i);
    std::size_t j = name_start;
    while (j < s.size() && (is_alnum(s[j]) || s[j] == '-' || s[j] == '_' || s[j] == ':')) ++j;
    std::string tag = lower(s.substr(name_start, j - name_start));
    // Skip attributes, honouring quotes.
    bool self_closing = false;
    char quote = 0;
    while (j < s.size()) {
      const char c = s[j];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '>') {
        break;
      }
      ++j;
    }
    if (j >= s.size()) {
      i = s.size();
      text_start = i;
      break;
    }
    std::size_t k = j;
    while (k > name_start && is_ascii_space(s[k - 1])) --k;
    self_closing = k > name_start && s[k - 1] == '/';
    i = j + 1;
    text_start = i;

    if (closing) {
      tb.close(tag);
      continue;
    }
    tb.open(tag, self_closing);
    if (!self_closing && (is_raw_text(tag) || is_rcdata(tag))) {
      std::size_t end = i;
      for (;;) {
        end = s.find("</", end);
        if (end == std::string_view::npos || starts_with_ci(s, end + 2, tag)) break;
        end += 2;
      }
      const std::size_t stop = end == std::string_view::npos ? s.size() : end;
      const std::string_view raw = s.substr(i, stop - i);
      tb.text(is_rcdata(tag) ? decode_entities(raw) : std::string(raw));
      tb.close(tag);
      if (end == std::string_view::npos) {
        i = s.size();
      } else {
        const std::size_t gt = s.find('>', end);
        i = gt == std::string_view::npos ? s.size() : gt + 1;
      }
      text_start = i;
    }
  }
  flush_text(s.size());
  return tb.finish();
}

std::optional<std::string> meta_charset(std::string_view body) {
  const std::string head = lower(body.substr(0, 1024));
  std::size_t pos = 0;
  while ((pos = head.find("<meta", pos)) != std::string::npos) {
    const std::size_t end = head.find('>', pos);
    const std::string_view tag = std::string_view(head).substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    const std::size_t at = tag.find("charset=");
    if (at != std::string_view::npos) {
      std::string_view v = tag.substr(at + 8);
      while (!v.empty() && (v.front() == '"' || v.front() == '\'' || v.front() == ' ')) v.remove_prefix(1);
      std::size_t stop = 0;
      while (stop < v.size() && (is_alnum(v[stop]) || v[stop] == '-' || v[stop] == '_' || v[stop] == '.' || v[stop] == ':'))
        ++stop;
      if (stop > 0) return std::string(v.substr(0, stop));
    }
    pos += 5;
  }
  return std::nullopt;
}

bool is_utf8_name(std::string_view cs) {
  const std::string l = lower(cs);
  return l == "utf-8" || l == "utf8";
}

// Returns the subtree length in scalar values; sets `remove` when the node
// should be dropped by the short-content rule.
std::size_t prune_short(DomNode& node, std::size_t min_chars, bool& remove) {
  remove = false;
  if (node.is_text()) return unicode::length(node.content);
  std::size_t total = 0;
  std::vector<DomNode> kept;
  kept.reserve(node.children.size());
  for (auto& child : node.children) {
    bool drop = false;
    const std::size_t len = prune_short(child, min_chars, drop);
    if (drop) continue;
    total += len;
    kept.push_back(std::move(child));
  }
  node.children = std::move(kept);
  const auto& listed = short_content_tags();
  if (std::find(listed.begin(), listed.end(), node.tag) != listed.end() && total < min_chars) remove = true;
  return total;
}

void prune_forbidden(DomNode& node) {
  const auto& forbidden = forbidden_tags();
  std::erase_if(node.children, [&](const DomNode& c) {
    return !c.is_text() && std::find(forbidden.begin(), forbidden.end(), c.tag) != forbidden.end();
  });
  for (auto& c : node.children)
    if (!c.is_text()) prune_forbidden(c);
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  for (char c : s) {
    if (is_ascii_space(c)) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

class TextAssembler {
 public:
  void visit(const DomNode& node) {
    bool seen_text = false;
    for (const auto& child : node.children) {
      if (child.is_text()) {
        add(child.content, node.tag, seen_text);
      } else {
        visit(child);
      }
    }
  }

  std::string finish() {
    while (!out_.empty() && (out_.back() == ' ' || out_.back() == '\n')) out_.pop_back();
    return std::move(out_);
  }

 private:
  bool ends_with_break() const { return out_.empty() || out_.back() == '\n'; }

  void add(std::string_view raw, const std::string& parent, bool& seen_text) {
    std::string piece = collapse_whitespace(raw);
    if (piece.find_first_not_of(' ') == std::string::npos) {
      if (!piece.empty() && !out_.empty() && out_.back() != ' ' && out_.back() != '\n') out_.push_back(' ');
      return;
    }
    // Only the first non-blank direct text of an element is attached to it.
    const bool attached = !seen_text;
    seen_text = true;
    const TagClass cls = attached ? classify_tag(parent) : TagClass::other;

    if (cls == TagClass::block) {
      while (!out_.empty() && out_.back() == ' ') out_.pop_back();
      if (!ends_with_break()) out_.push_back('\n');
    } else if (cls == TagClass::inline_) {
      if (!out_.empty() && out_.back() != ' ' && out_.back() != '\n') out_.push_back(' ');
    }
    if (out_.empty() || out_.back() == ' ' || out_.back() == '\n') {
      const std::size_t first = piece.find_first_not_of(' ');
      piece.erase(0, first);
    }
    out_ += piece;
  }

  std::string out_;
};

}  // namespace

DomNode DomNode::element(std::string tag, std::vector<DomNode> children) {
  DomNode n;
  n.kind = Kind::element;
  n.tag = std::move(tag);
  n.children = std::move(children);
  return n;
}

DomNode DomNode::text(std::string content) {
  DomNode n;
  n.kind = Kind::text;
  n.content = std::move(content);
  return n;
}

const std::vector<std::string_view>& block_tags() {
  static const std::vector<std::string_view> tags = {
      "address", "article", "aside",    "blockquote", "body",     "br",       "button",     "canvas",
      "caption", "col",     "colgroup", "dd",         "div",      "dl",       "dt",         "embed",
      "fieldset", "figcaption", "figure", "footer",   "form",     "h1",       "h2",         "h3",
      "h4",      "h5",      "h6",       "header",     "hgroup",   "hr",       "li",         "map",
      "noscript", "object", "ol",       "output",     "p",        "pre",      "progress",   "section",
      "table",   "tbody",   "textarea", "tfoot",      "th",       "thead",    "tr",         "ul",
      "video"};
  return tags;
}

const std::vector<std::string_view>& inline_tags() {
  static const std::vector<std::string_view> tags = {
      "address", "cite",   "details", "datalist", "iframe", "img",   "input", "label",
      "legend",  "optgroup", "q",     "select",   "summary", "tbody", "td",   "time"};
  return tags;
}

TagClass classify_tag(std::string_view name) noexcept {
  static const std::unordered_set<std::string_view> block(block_tags().begin(), block_tags().end());
  static const std::unordered_set<std::string_view> inl(inline_tags().begin(), inline_tags().end());
  if (block.count(name)) return TagClass::block;
  if (inl.count(name)) return TagClass::inline_;
  return TagClass::other;
}

const std::vector<std::string_view>& forbidden_tags() {
  static const std::vector<std::string_view> tags = {"script", "style", "header", "iframe", "footer", "form"};
  return tags;
}

const std::vector<std::string_view>& short_content_tags() {
  static const std::vector<std::string_view> tags = {"body", "div", "p", "section", "table", "ul", "ol", "dl"};
  return tags;
}

std::string decode_body(std::string_view body, const std::optional<std::string>& declared_charset) {
  auto try_charset = [&](const std::string& cs) -> std::optional<std::string> {
    if (is_utf8_name(cs)) return unicode::sanitize_utf8(body);
    return unicode::convert_to_utf8(body, cs);
  };
  if (declared_charset && !declared_charset->empty()) {
    if (auto s = try_charset(*declared_charset)) return *s;
  }
  if (auto cs = meta_charset(body)) {
    if (auto s = try_charset(*cs)) return *s;
  }
  return unicode::sanitize_utf8(body);
}

DomNode parse_html(std::string_view body, const std::optional<std::string>& declared_charset) {
  const std::string decoded = decode_body(body, declared_charset);
  return parse_decoded(decoded);
}

std::string text_content(const DomNode& node) {
  if (node.is_text()) return node.content;
  std::string out;
  for (const auto& c : node.children) out += text_content(c);
  return out;
}

DomNode minify(const DomNode& dom, std::size_t min_chars) {
  DomNode out = dom;
  if (!out.is_text()) {
    const auto& forbidden = forbidden_tags();
    if (std::find(forbidden.begin(), forbidden.end(), out.tag) != forbidden.end()) {
      out.children.clear();
      return DomNode::element(std::string(kDocumentTag));
    }
    prune_forbidden(out);
  }
  bool remove = false;
  prune_short(out, min_chars, remove);
  if (remove) return DomNode::element(std::string(kDocumentTag));
  return out;
}

std::string extract_text(const DomNode& dom) {
  if (dom.is_text()) {
    DomNode wrapper = DomNode::element(std::string(kDocumentTag), {dom});
    return extract_text(wrapper);
  }
  TextAssembler assembler;
  assembler.visit(dom);
  return assembler.finish();
}

std::string html_to_text(std::string_view body, const std::optional<std::string>& declared_charset,
                         bool apply_minify) {
  DomNode dom = parse_html(body, declared_charset);
  if (apply_minify) dom = minify(dom);
  return extract_text(dom);
}

}  // namespace textmill::html
