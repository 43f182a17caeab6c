#include "textmill/warc.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <istream>
#include <sstream>

namespace textmill::warc {

namespace {

constexpr std::size_t kChunk = 1 << 16;

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i], y = b[i];
    if (x >= 'A' && x <= 'Z') x = static_cast<char>(x - 'A' + 'a');
    if (y >= 'A' && y <= 'Z') y = static_cast<char>(y - 'A' + 'a');
    if (x != y) return false;
  }
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_gzip_magic(std::string_view s) {
  return s.size() >= 2 && static_cast<unsigned char>(s[0]) == 0x1f &&
         static_cast<unsigned char>(s[1]) == 0x8b;
}

// End of the HTTP header block inside a response record, or npos.
std::size_t http_header_end(std::string_view body, std::size_t* sep_len) {
  const std::size_t crlf = body.find("\r\n\r\n");
  const std::size_t lf = body.find("\n\n");
  if (crlf != std::string_view::npos && (lf == std::string_view::npos || crlf <= lf)) {
    *sep_len = 4;
    return crlf;
  }
  if (lf != std::string_view::npos) {
    *sep_len = 2;
    return lf;
  }
  return std::string_view::npos;
}

std::optional<std::string> http_header(std::string_view body, std::string_view name) {
  if (body.substr(0, 5) != "HTTP/") return std::nullopt;
  std::size_t sep = 0;
  const std::size_t end = http_header_end(body, &sep);
  const std::string_view head = body.substr(0, end == std::string_view::npos ? body.size() : end);
  std::size_t pos = head.find('\n');
  while (pos != std::string_view::npos && pos < head.size()) {
    const std::size_t next = head.find('\n', pos + 1);
    const std::string_view line =
        head.substr(pos + 1, (next == std::string_view::npos ? head.size() : next) - pos - 1);
    const std::size_t colon = line.find(':');
    if (colon != std::string_view::npos && iequals(trim(line.substr(0, colon)), name))
      return std::string(trim(line.substr(colon + 1)));
    pos = next;
  }
  return std::nullopt;
}

RecordType classify(std::string_view type) {
  if (iequals(type, "response")) return RecordType::response;
  if (iequals(type, "request")) return RecordType::request;
  if (iequals(type, "metadata")) return RecordType::metadata;
  return RecordType::other;
}

std::string effective_content_type(const WarcRecord& rec) {
  if (auto t = rec.header("WARC-Identified-Payload-Type"); t && !t->empty()) return *t;
  if (auto t = http_header(rec.body, "Content-Type")) return *t;
  if (auto t = rec.header("Content-Type")) {
    if (lower(*t).rfind("application/http", 0) != 0) return *t;
  }
  return {};
}

}  // namespace

std::string_view to_string(RecordType t) noexcept {
  switch (t) {
    case RecordType::response: return "response";
    case RecordType::request: return "request";
    case RecordType::metadata: return "metadata";
    case RecordType::other: return "other";
  }
  return "other";
}

std::optional<std::string> WarcRecord::header(std::string_view name) const {
  for (const auto& [k, v] : headers)
    if (iequals(k, name)) return v;
  return std::nullopt;
}

std::optional<int> WarcRecord::http_status() const {
  std::string_view b = body;
  if (b.substr(0, 5) != "HTTP/") return std::nullopt;
  const std::size_t sp = b.find(' ');
  if (sp == std::string_view::npos) return std::nullopt;
  int status = 0;
  const char* first = b.data() + sp + 1;
  const char* last = b.data() + std::min(b.size(), sp + 4);
  auto [p, ec] = std::from_chars(first, last, status);
  if (ec != std::errc() || p != last) return std::nullopt;
  return status;
}

std::string_view WarcRecord::payload() const {
  std::string_view b = body;
  if (b.substr(0, 5) != "HTTP/") return b;
  std::size_t sep = 0;
  const std::size_t end = http_header_end(b, &sep);
  if (end == std::string_view::npos) return {};
  return b.substr(end + sep);
}

std::optional<std::string> WarcRecord::declared_charset() const {
  const std::string ct = lower(content_type);
  const std::size_t at = ct.find("charset=");
  if (at == std::string::npos) return std::nullopt;
  std::string_view v = std::string_view(ct).substr(at + 8);
  const std::size_t end = v.find_first_of("; \t");
  v = v.substr(0, end);
  while (!v.empty() && (v.front() == '"' || v.front() == '\'')) v.remove_prefix(1);
  while (!v.empty() && (v.back() == '"' || v.back() == '\'')) v.remove_suffix(1);
  if (v.empty()) return std::nullopt;
  return std::string(v);
}

// Buffered view of the input with absolute offsets and bounded look-back.
class WarcReader::Source {
 public:
  explicit Source(std::istream& in) : in_(in) {}

  std::uint64_t tell() const noexcept { return base_ + pos_; }

  bool fill(std::size_t need) {
    while (buf_.size() - pos_ < need && !eof_) {
      const std::size_t old = buf_.size();
      buf_.resize(old + kChunk);
      in_.read(buf_.data() + old, kChunk);
      const auto got = static_cast<std::size_t>(in_.gcount());
      buf_.resize(old + got);
      if (got == 0) eof_ = true;
    }
    return buf_.size() - pos_ >= need;
  }

  bool at_end() { return !fill(1); }

  std::string_view peek(std::size_t n) {
    fill(n);
    return std::string_view(buf_).substr(pos_, std::min(n, buf_.size() - pos_));
  }

  void advance(std::size_t n) { pos_ += std::min(n, buf_.size() - pos_); }

  void seek(std::uint64_t abs) {
    pos_ = static_cast<std::size_t>(std::clamp<std::uint64_t>(abs, base_, base_ + buf_.size()) - base_);
  }

  /// Reads through the next '\n'; returns the line without CR/LF, or nullopt at end.
  std::optional<std::string_view> line() {
    std::size_t scan = pos_;
    for (;;) {
      const std::size_t nl = buf_.find('\n', scan);
      if (nl != std::string::npos) {
        std::string_view l(buf_.data() + pos_, nl - pos_);
        pos_ = nl + 1;
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        return l;
      }
      scan = buf_.size();
      const std::size_t before = buf_.size();
      fill(buf_.size() - pos_ + 1);
      if (buf_.size() == before) break;
    }
    if (pos_ >= buf_.size()) return std::nullopt;
    std::string_view l(buf_.data() + pos_, buf_.size() - pos_);
    pos_ = buf_.size();
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    return l;
  }

  /// Moves to the next occurrence of `pattern` at or after the current
  /// position that starts a line; returns false (at end) if there is none.
  bool skip_to_line_starting(std::string_view pattern) {
    std::size_t scan = pos_;
    for (;;) {
      std::size_t hit = buf_.find(pattern, scan);
      while (hit != std::string::npos && hit > 0 && buf_[hit - 1] != '\n') hit = buf_.find(pattern, hit + 1);
      if (hit != std::string::npos) {
        pos_ = hit;
        return true;
      }
      scan = buf_.size() >= pattern.size() ? buf_.size() - pattern.size() + 1 : 0;
      scan = std::max(scan, pos_);
      const std::size_t before = buf_.size();
      fill(buf_.size() - pos_ + kChunk);
      if (buf_.size() == before) {
        pos_ = buf_.size();
        return false;
      }
    }
  }

  bool skip_to(std::string_view pattern) {
    std::size_t scan = pos_;
    for (;;) {
      const std::size_t hit = buf_.find(pattern, scan);
      if (hit != std::string::npos) {
        pos_ = hit;
        return true;
      }
      scan = buf_.size() >= pattern.size() ? buf_.size() - pattern.size() + 1 : 0;
      scan = std::max(scan, pos_);
      const std::size_t before = buf_.size();
      fill(buf_.size() - pos_ + kChunk);
      if (buf_.size() == before) {
        pos_ = buf_.size();
        return false;
      }
    }
  }

  /// Drops consumed bytes; only called between records.
  void compact() {
    if (pos_ > (4u << 20)) {
      buf_.erase(0, pos_);
      base_ += pos_;
      pos_ = 0;
    }
  }

  std::string_view buffered() const { return std::string_view(buf_).substr(pos_); }

 private:
  std::istream& in_;
  std::string buf_;
  std::size_t pos_ = 0;
  std::uint64_t base_ = 0;
  bool eof_ = false;
};

namespace {

enum class Outcome { record, error, end };

struct ParseResult {
  Outcome outcome = Outcome::end;
  WarcRecord record;
  std::string message;
};

template <typename Src>
void skip_blank_lines(Src& src) {
  for (;;) {
    const std::string_view p = src.peek(2);
    if (p.empty()) return;
    if (p[0] == '\n') {
      src.advance(1);
    } else if (p.size() == 2 && p[0] == '\r' && p[1] == '\n') {
      src.advance(2);
    } else {
      return;
    }
  }
}

// Parses one uncompressed record starting at the current position.
template <typename Src>
ParseResult parse_plain(Src& src) {
  ParseResult r;
  const std::uint64_t start = src.tell();
  auto version = src.line();
  if (!version) return r;
  if (version->substr(0, 7) != "WARC/1.") {
    r.outcome = Outcome::error;
    r.message = "expected WARC version line";
    return r;
  }
  WarcRecord& rec = r.record;
  rec.offset = start;
  for (;;) {
    auto line = src.line();
    if (!line) {
      r.outcome = Outcome::error;
      r.message = "truncated header block";
      return r;
    }
    if (line->empty()) break;
    if ((line->front() == ' ' || line->front() == '\t') && !rec.headers.empty()) {
      rec.headers.back().second += " " + std::string(trim(*line));
      continue;
    }
    const std::size_t colon = line->find(':');
    if (colon == std::string_view::npos) {
      r.outcome = Outcome::error;
      r.message = "malformed header line";
      return r;
    }
    rec.headers.emplace_back(std::string(trim(line->substr(0, colon))),
                             std::string(trim(line->substr(colon + 1))));
  }
  const std::uint64_t block_start = src.tell();
  std::uint64_t content_length = 0;
  {
    auto cl = rec.header("Content-Length");
    if (!cl) {
      r.outcome = Outcome::error;
      r.message = "missing Content-Length";
      src.seek(block_start);
      return r;
    }
    auto [p, ec] = std::from_chars(cl->data(), cl->data() + cl->size(), content_length);
    if (ec != std::errc() || p != cl->data() + cl->size()) {
      r.outcome = Outcome::error;
      r.message = "non-numeric Content-Length";
      src.seek(block_start);
      return r;
    }
  }
  if (!src.fill(static_cast<std::size_t>(content_length))) {
    r.outcome = Outcome::error;
    r.message = "Content-Length beyond end of stream";
    src.seek(block_start);
    return r;
  }
  rec.body.assign(src.peek(static_cast<std::size_t>(content_length)));
  src.advance(static_cast<std::size_t>(content_length));
  const std::string_view term = src.peek(4);
  std::size_t term_len = 0;
  if (term.substr(0, 4) == "\r\n\r\n") {
    term_len = 4;
  } else if (term.substr(0, 2) == "\n\n") {
    term_len = 2;
  } else if (term.empty()) {
    term_len = 0;  // tolerate a missing terminator on the final record
  } else {
    r.outcome = Outcome::error;
    r.message = "Content-Length " + std::to_string(content_length) +
                " does not end on a record boundary";
    src.seek(block_start);
    return r;
  }
  src.advance(term_len);
  rec.length = src.tell() - start;
  rec.type_name = rec.header("WARC-Type").value_or("");
  rec.record_type = classify(rec.type_name);
  rec.target_uri = rec.header("WARC-Target-URI").value_or("");
  rec.content_type = effective_content_type(rec);
  r.outcome = Outcome::record;
  return r;
}

struct InflateResult {
  bool ok = false;
  std::string data;
  std::size_t consumed = 0;
  std::string message;
};

// Inflates exactly one gzip member from the front of `src`.
template <typename Src>
InflateResult inflate_member(Src& src) {
  InflateResult out;
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
    out.message = "zlib init failed";
    return out;
  }
  std::size_t offered = 0;
  char buf[kChunk];
  int ret = Z_OK;
  while (ret != Z_STREAM_END) {
    if (zs.avail_in == 0) {
      src.fill(offered + kChunk);
      const std::string_view avail = src.buffered();
      if (avail.size() <= offered) {
        out.message = "truncated gzip member";
        inflateEnd(&zs);
        return out;
      }
      zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(avail.data() + offered));
      zs.avail_in = static_cast<uInt>(avail.size() - offered);
      offered = avail.size();
    }
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    ret = inflate(&zs, Z_NO_FLUSH);
    if (ret != Z_OK && ret != Z_STREAM_END) {
      out.message = std::string("gzip error: ") + (zs.msg ? zs.msg : "inflate failed");
      inflateEnd(&zs);
      return out;
    }
    out.data.append(buf, sizeof(buf) - zs.avail_out);
  }
  out.consumed = offered - zs.avail_in;
  inflateEnd(&zs);
  out.ok = true;
  src.advance(out.consumed);
  return out;
}

}  // namespace

WarcReader::WarcReader(std::istream& in) : src_(std::make_unique<Source>(in)) {}
WarcReader::~WarcReader() = default;

std::optional<WarcRecord> WarcReader::next() {
  if (!pending_.empty()) {
    WarcRecord rec = std::move(pending_.front());
    pending_.erase(pending_.begin());
    return rec;
  }
  for (;;) {
    src_->compact();
    skip_blank_lines(*src_);
    if (src_->at_end()) return std::nullopt;
    const std::uint64_t start = src_->tell();

    if (is_gzip_magic(src_->peek(2))) {
      InflateResult member = inflate_member(*src_);
      if (!member.ok) {
        if (!started_) throw FormatError("not a WARC stream: " + member.message);
        errors_.push_back({start, member.message});
        src_->seek(start + 1);
        if (!src_->skip_to("\x1f\x8b")) return std::nullopt;
        continue;
      }
      std::istringstream inner(std::move(member.data));
      Source inner_src(inner);
      std::vector<WarcRecord> found;
      bool bad = false;
      for (;;) {
        skip_blank_lines(inner_src);
        if (inner_src.at_end()) break;
        ParseResult r = parse_plain(inner_src);
        if (r.outcome != Outcome::record) {
          if (!started_ && found.empty()) throw FormatError("not a WARC stream: " + r.message);
          errors_.push_back({start, r.message});
          bad = true;
          break;
        }
        r.record.offset = start;
        r.record.length = member.consumed;
        found.push_back(std::move(r.record));
      }
      if (found.empty()) {
        if (!bad) errors_.push_back({start, "empty gzip member"});
        continue;
      }
      started_ = true;
      WarcRecord first = std::move(found.front());
      for (std::size_t i = 1; i < found.size(); ++i) pending_.push_back(std::move(found[i]));
      return first;
    }

    ParseResult r = parse_plain(*src_);
    if (r.outcome == Outcome::record) {
      started_ = true;
      return std::move(r.record);
    }
    if (r.outcome == Outcome::end) return std::nullopt;
    if (!started_) throw FormatError("not a WARC stream: " + r.message);
    errors_.push_back({start, r.message});
    src_->seek(start + 1);
    if (!src_->skip_to_line_starting("WARC/1.")) return std::nullopt;
  }
}

std::vector<WarcRecord> parse_warc(std::istream& in, std::vector<RecordError>* errors) {
  WarcReader reader(in);
  std::vector<WarcRecord> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  if (errors) *errors = reader.errors();
  return out;
}

std::size_t SelectStats::total() const {
  std::size_t n = kept;
  for (const auto& [_, c] : dropped) n += c;
  return n;
}

bool sniff_html(std::string_view payload) {
  std::string head = lower(payload.substr(0, 1024));
  std::string_view h = head;
  if (h.substr(0, 3) == "\xef\xbb\xbf") h.remove_prefix(3);
  while (!h.empty() && (h.front() == ' ' || h.front() == '\t' || h.front() == '\r' || h.front() == '\n'))
    h.remove_prefix(1);
  if (h.substr(0, 14) == "<!doctype html") return true;
  for (std::string_view sig : {"<html", "<head", "<body"}) {
    if (h.find(sig) != std::string_view::npos) return true;
  }
  return false;
}

std::optional<std::string> drop_reason(const WarcRecord& rec) {
  if (rec.record_type != RecordType::response) return kDropNotResponse;
  if (auto status = rec.http_status(); status && *status != 200) return kDropHttpStatus;
  if (!rec.content_type.empty()) {
    std::string mime = lower(rec.content_type.substr(0, rec.content_type.find(';')));
    mime = std::string(trim(mime));
    if (mime == "text/html" || mime == "application/xhtml+xml") return std::nullopt;
    return kDropNonHtml;
  }
  if (sniff_html(rec.payload())) return std::nullopt;
  return kDropNonHtml;
}

std::vector<WarcRecord> select_html(std::vector<WarcRecord> records, SelectStats* stats) {
  std::vector<WarcRecord> kept;
  for (auto& rec : records) {
    if (auto reason = drop_reason(rec)) {
      if (stats) ++stats->dropped[*reason];
    } else {
      if (stats) ++stats->kept;
      kept.push_back(std::move(rec));
    }
  }
  return kept;
}

std::string serialize_record(std::string_view type, std::string_view target_uri,
                             const std::vector<std::pair<std::string, std::string>>& extra_headers,
                             std::string_view block) {
  std::string out = "WARC/1.0\r\n";
  out += "WARC-Type: ";
  out += type;
  out += "\r\n";
  if (!target_uri.empty()) {
    out += "WARC-Target-URI: ";
    out += target_uri;
    out += "\r\n";
  }
  for (const auto& [k, v] : extra_headers) out += k + ": " + v + "\r\n";
  out += "Content-Length: " + std::to_string(block.size()) + "\r\n\r\n";
  out += block;
  out += "\r\n\r\n";
  return out;
}

std::string gzip_member(std::string_view data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw Error("zlib deflate init failed");
  std::string out;
  out.resize(deflateBound(&zs, static_cast<uLong>(data.size())) + 32);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int ret = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (ret != Z_STREAM_END) throw Error("zlib deflate failed");
  out.resize(zs.total_out);
  return out;
}

}  // namespace textmill::warc
