#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "textmill/errors.hpp"

namespace textmill::warc {

enum class RecordType { response, request, metadata, other };

std::string_view to_string(RecordType t) noexcept;

struct WarcRecord {
  RecordType record_type = RecordType::other;
  std::string type_name;    // raw WARC-Type value
  std::string target_uri;
  /// Effective payload MIME type: WARC-Identified-Payload-Type, else the
  /// HTTP Content-Type of a response block, else the WARC Content-Type when
  /// it does not describe an HTTP message. Empty when unknown.
  std::string content_type;
  std::vector<std::pair<std::string, std::string>> headers;  // WARC headers, in order
  std::string body;         // record block, byte exact
  std::uint64_t offset = 0; // first byte of the record (or its gzip member)
  std::uint64_t length = 0; // bytes up to and including the record terminator

  /// Case-insensitive WARC header lookup.
  std::optional<std::string> header(std::string_view name) const;
  /// HTTP status of a response block, when it carries one.
  std::optional<int> http_status() const;
  /// Block with the HTTP status line and headers removed.
  std::string_view payload() const;
  /// charset parameter of the HTTP Content-Type, if any.
  std::optional<std::string> declared_charset() const;

  friend bool operator==(const WarcRecord&, const WarcRecord&) = default;
};

/// Per-record problem found mid-stream; parsing continued past it.
struct RecordError {
  std::uint64_t offset;
  std::string message;
};

/// Lazily parses WARC/1.0 and WARC/1.1 records from a stream. Records may be
/// plain or individually gzip-compressed (one member per record).
class WarcReader {
 public:
  explicit WarcReader(std::istream& in);
  ~WarcReader();
  WarcReader(const WarcReader&) = delete;
  WarcReader& operator=(const WarcReader&) = delete;

  /// Next record or nullopt at end. Throws FormatError if the stream does not
  /// begin with a WARC version line. A record whose Content-Length does not
  /// land on a record terminator is skipped, reported in errors(), and parsing
  /// resumes at the next "WARC/" boundary.
  std::optional<WarcRecord> next();

  const std::vector<RecordError>& errors() const noexcept { return errors_; }

 private:
  class Source;
  std::unique_ptr<Source> src_;
  std::vector<RecordError> errors_;
  bool started_ = false;
  std::vector<WarcRecord> pending_;  // extra records found inside one gzip member
};

std::vector<WarcRecord> parse_warc(std::istream& in, std::vector<RecordError>* errors = nullptr);

/// Drop reasons used by select_html.
inline constexpr const char* kDropNotResponse = "not-response";
inline constexpr const char* kDropNonHtml = "non-html";
inline constexpr const char* kDropHttpStatus = "http-status";

struct SelectStats {
  std::size_t kept = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> count

  std::size_t total() const;
};

/// True when the first 1024 payload bytes carry an HTML signature.
bool sniff_html(std::string_view payload);
/// Effective HTML test used by select_html (MIME first, sniffing if absent).
std::optional<std::string> drop_reason(const WarcRecord& rec);

std::vector<WarcRecord> select_html(std::vector<WarcRecord> records, SelectStats* stats = nullptr);

/// Serializes a record as an uncompressed WARC/1.0 record (used by tests and
/// fixture generators).
std::string serialize_record(std::string_view type, std::string_view target_uri,
                             const std::vector<std::pair<std::string, std::string>>& extra_headers,
                             std::string_view block);
/// gzip-compresses `data` into a single member.
std::string gzip_member(std::string_view data);

}  // namespace textmill::warc
