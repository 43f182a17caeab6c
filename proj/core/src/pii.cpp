#include "textmill/pii.hpp"

#include <algorithm>
#include <array>

#include "textmill/unicode.hpp"

namespace textmill::pii {

namespace {

bool is_word(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}
bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
bool is_alpha(char c) noexcept { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_hex(char c) noexcept { return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }
bool is_space(char c) noexcept { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_local(char c) noexcept {
  return is_alpha(c) || is_digit(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}
bool is_domain(char c) noexcept { return is_alpha(c) || is_digit(c) || c == '.' || c == '-'; }

bool boundary_before(std::string_view s, std::size_t pos) noexcept { return pos == 0 || !is_word(s[pos - 1]); }
bool boundary_after(std::string_view s, std::size_t pos) noexcept { return pos >= s.size() || !is_word(s[pos]); }

bool is_tag_word(std::string_view w) noexcept {
  return w == "EMAIL" || w == "USER" || w == "IP_ADDRESS" || w == "KEY";
}

std::size_t run(std::string_view s, std::size_t pos, bool (*pred)(char) noexcept) {
  std::size_t end = pos;
  while (end < s.size() && pred(s[end])) ++end;
  return end;
}

// Digit groups separated by one of ' ', '.', '-', optionally opened by a
// parenthesized group. Returns the longest end with >= 7 digits and a clean
// right boundary.
std::optional<std::size_t> match_number(std::string_view s, std::size_t pos) {
  std::size_t i = pos;
  std::size_t digits = 0;
  if (i < s.size() && s[i] == '(') {
    const std::size_t e = run(s, i + 1, is_digit);
    if (e == i + 1 || e >= s.size() || s[e] != ')') return std::nullopt;
    digits += e - (i + 1);
    i = e + 1;
    if (i < s.size() && s[i] == ' ') ++i;
  }
  std::optional<std::size_t> best;
  while (i < s.size() && is_digit(s[i])) {
    const std::size_t e = run(s, i, is_digit);
    digits += e - i;
    if (digits >= 7 && boundary_after(s, e)) best = e;
    if (e + 1 < s.size() && (s[e] == ' ' || s[e] == '.' || s[e] == '-') && is_digit(s[e + 1])) {
      i = e + 1;
    } else {
      break;
    }
  }
  return best;
}

std::optional<std::size_t> match_hex(std::string_view s, std::size_t pos) {
  const std::size_t e = run(s, pos, is_hex);
  if (e - pos >= 16 && boundary_after(s, e)) return e;
  return std::nullopt;
}

std::optional<std::size_t> match_mixed(std::string_view s, std::size_t pos) {
  const std::size_t e = run(s, pos, is_word);
  if (e - pos < 8) return std::nullopt;
  std::size_t digits = 0;
  bool letter = false;
  for (std::size_t i = pos; i < e; ++i) {
    digits += is_digit(s[i]);
    letter = letter || is_alpha(s[i]);
  }
  if (digits >= 4 && letter) return e;
  return std::nullopt;
}

struct Span {
  std::size_t begin;
  std::size_t end;
};

struct Piece {
  std::size_t orig_begin;  // byte offsets into the original text
  std::size_t orig_end;
  bool is_tag = false;
  Kind kind = Kind::key;
};

using Matcher = std::optional<std::size_t> (*)(std::string_view, std::size_t);

bool overlaps(const std::vector<Span>& tags, std::size_t b, std::size_t e) {
  auto it = std::lower_bound(tags.begin(), tags.end(), b, [](const Span& t, std::size_t v) { return t.end <= v; });
  return it != tags.end() && it->begin < e;
}

// A replacement word inside a candidate span would let a second redaction
// pass rewrite the output, so such candidates are rejected in every pass.
bool contains_tag_word(std::string_view s, std::size_t b, std::size_t e) {
  std::size_t i = b;
  while (i > 0 && is_word(s[i - 1])) --i;
  while (i < e) {
    if (!is_word(s[i])) {
      ++i;
      continue;
    }
    const std::size_t end = run(s, i, is_word);
    if (is_tag_word(s.substr(i, end - i))) return true;
    i = end;
  }
  return false;
}

std::vector<Span> scan(std::string_view s, const std::vector<Span>& tags, Kind kind) {
  std::vector<Span> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::optional<std::size_t> end;
    switch (kind) {
      case Kind::email: {
        if (!is_local(s[i]) || !boundary_before(s, i)) break;
        end = match_email(s, i);
        if (!end) {
          // Every start inside this local-part run fails the same way.
          i = std::max(i + 1, run(s, i, is_local));
          continue;
        }
        break;
      }
      case Kind::user: end = match_user(s, i); break;
      case Kind::ip_address: {
        end = match_ipv4(s, i);
        if (!end) end = match_ipv6(s, i);
        break;
      }
      case Kind::key: end = match_key(s, i); break;
    }
    if (end && !overlaps(tags, i, *end) && !contains_tag_word(s, i, *end)) {
      out.push_back({i, *end});
      i = *end;
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace

std::string_view tag(Kind kind) noexcept {
  switch (kind) {
    case Kind::email: return "EMAIL";
    case Kind::user: return "USER";
    case Kind::ip_address: return "IP_ADDRESS";
    case Kind::key: return "KEY";
  }
  return "KEY";
}

bool is_simple_number(std::string_view s) noexcept {
  return !s.empty() && s.size() <= 4 && std::all_of(s.begin(), s.end(), [](char c) { return is_digit(c); });
}

std::optional<std::size_t> match_email(std::string_view s, std::size_t pos) {
  if (pos >= s.size() || !boundary_before(s, pos)) return std::nullopt;
  const std::size_t at = run(s, pos, is_local);
  if (at == pos || at >= s.size() || s[at] != '@') return std::nullopt;
  const std::size_t dom_end = run(s, at + 1, is_domain);
  // Rightmost dot that leaves a non-empty host and is followed by 2+ letters
  // ending on a boundary.
  for (std::size_t k = dom_end; k-- > at + 2;) {
    if (s[k] != '.') continue;
    const std::size_t tld_end = run(s, k + 1, is_alpha);
    if (tld_end - (k + 1) >= 2 && boundary_after(s, tld_end)) return tld_end;
  }
  return std::nullopt;
}

std::optional<std::size_t> match_user(std::string_view s, std::size_t pos) {
  if (pos >= s.size() || s[pos] != '@') return std::nullopt;
  if (pos > 0 && !is_space(s[pos - 1])) return std::nullopt;
  const std::size_t e = run(s, pos + 1, is_word);
  const std::size_t len = e - (pos + 1);
  if (len < 2 || len > 15) return std::nullopt;
  if (is_tag_word(s.substr(pos + 1, len))) return std::nullopt;
  return e;
}

std::optional<std::size_t> match_ipv4(std::string_view s, std::size_t pos) {
  if (!boundary_before(s, pos)) return std::nullopt;
  std::size_t i = pos;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (i >= s.size() || s[i] != '.') return std::nullopt;
      ++i;
    }
    const std::size_t e = run(s, i, is_digit);
    if (e == i || e - i > 3) return std::nullopt;
    int value = 0;
    for (std::size_t k = i; k < e; ++k) value = value * 10 + (s[k] - '0');
    if (value > 255) return std::nullopt;
    i = e;
  }
  if (!boundary_after(s, i)) return std::nullopt;
  return i;
}

std::optional<std::size_t> match_ipv6(std::string_view s, std::size_t pos) {
  if (!boundary_before(s, pos)) return std::nullopt;
  std::optional<std::size_t> best;
  std::size_t i = pos;
  for (int group = 1; group <= 8; ++group) {
    const std::size_t e = run(s, i, is_hex);
    const std::size_t len = e - i;
    if (len == 0) break;
    // A group is a valid final group when it is short enough and cleanly ends.
    if (group >= 3 && len <= 4 && boundary_after(s, e)) best = e;
    if (len > 4 || e >= s.size() || s[e] != ':') break;
    i = e + 1;
  }
  return best;
}

std::optional<std::size_t> match_key(std::string_view s, std::size_t pos) {
  if (pos >= s.size() || !boundary_before(s, pos)) return std::nullopt;
  std::optional<std::size_t> best;
  for (Matcher m : {Matcher{match_hex}, Matcher{match_number}, Matcher{match_mixed}}) {
    const auto e = m(s, pos);
    if (e && (!best || *e > *best)) best = e;
  }
  if (best && is_simple_number(s.substr(pos, *best - pos))) return std::nullopt;
  return best;
}

RedactResult redact(std::string_view text) {
  std::vector<Piece> pieces;
  if (!text.empty()) pieces.push_back({0, text.size(), false, Kind::key});

  for (Kind kind : {Kind::email, Kind::user, Kind::ip_address, Kind::key}) {
    // Current text and the span of each piece within it.
    std::string current;
    std::vector<Span> piece_spans;
    std::vector<Span> tags;
    for (const auto& p : pieces) {
      const std::size_t b = current.size();
      if (p.is_tag) {
        current += tag(p.kind);
        tags.push_back({b, current.size()});
      } else {
        current.append(text.substr(p.orig_begin, p.orig_end - p.orig_begin));
      }
      piece_spans.push_back({b, current.size()});
    }
    const auto matches = scan(current, tags, kind);
    if (matches.empty()) continue;

    std::vector<Piece> next;
    std::size_t m = 0;
    for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
      const Piece& p = pieces[pi];
      if (p.is_tag) {
        next.push_back(p);
        continue;
      }
      const Span ps = piece_spans[pi];
      std::size_t cursor = ps.begin;
      while (m < matches.size() && matches[m].begin < ps.end) {
        const Span ms = matches[m];
        if (ms.begin > cursor)
          next.push_back({p.orig_begin + (cursor - ps.begin), p.orig_begin + (ms.begin - ps.begin), false, Kind::key});
        next.push_back({p.orig_begin + (ms.begin - ps.begin), p.orig_begin + (ms.end - ps.begin), true, kind});
        cursor = ms.end;
        ++m;
      }
      if (cursor < ps.end) next.push_back({p.orig_begin + (cursor - ps.begin), p.orig_end, false, Kind::key});
    }
    pieces = std::move(next);
  }

  RedactResult result;
  std::size_t cp_offset = 0;
  std::size_t byte_offset = 0;
  for (const auto& p : pieces) {
    cp_offset += unicode::length(text.substr(byte_offset, p.orig_begin - byte_offset));
    const std::string_view original = text.substr(p.orig_begin, p.orig_end - p.orig_begin);
    const std::size_t cp_len = unicode::length(original);
    if (p.is_tag) {
      result.text += tag(p.kind);
      result.redactions.push_back({p.kind, cp_offset, cp_offset + cp_len, std::string(original)});
    } else {
      result.text.append(original);
    }
    cp_offset += cp_len;
    byte_offset = p.orig_end;
  }
  return result;
}

std::string restore(const RedactResult& result) {
  const auto cps = unicode::decode(result.text);
  std::string out;
  std::size_t redacted_pos = 0;  // code points into result.text
  std::size_t original_pos = 0;  // code points into the original text
  auto copy = [&](std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) unicode::append_utf8(out, cps[redacted_pos + i]);
    redacted_pos += n;
    original_pos += n;
  };
  for (const auto& r : result.redactions) {
    copy(r.start - original_pos);
    out += r.original;
    redacted_pos += tag(r.kind).size();
    original_pos = r.end;
  }
  copy(cps.size() - redacted_pos);
  return out;
}

nlohmann::json to_json(const Redaction& r, const std::string& doc_id) {
  return {{"id", doc_id}, {"kind", std::string(tag(r.kind))}, {"start", r.start}, {"end", r.end},
          {"tag", std::string(tag(r.kind))}};
}

}  // namespace textmill::pii
