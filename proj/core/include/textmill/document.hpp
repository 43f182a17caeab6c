#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmill/errors.hpp"

namespace textmill {

using Meta = nlohmann::ordered_json;

// Reserved meta keys; everything else is carried through verbatim.
inline constexpr const char* kMetaUrl = "url";
inline constexpr const char* kMetaLanguage = "language";
inline constexpr const char* kMetaSeed = "seed";

/// One text record. Text is UTF-8; meta is a schemaless JSON object.
struct Document {
  std::string id;
  std::string text;
  Meta meta = Meta::object();

  std::size_t byte_len() const noexcept { return text.size(); }

  /// String value of a meta key, or nullopt when absent / not a string.
  std::optional<std::string> meta_string(const std::string& key) const;

  friend bool operator==(const Document&, const Document&) = default;
};

using Dataset = std::vector<Document>;

/// Lowercase, non-empty language code ("en", "zhs"). "und" marks unknown.
class LanguageTag {
 public:
  LanguageTag() = default;
  /// Throws ConfigError if `code` is empty or not lowercase.
  explicit LanguageTag(std::string code);

  const std::string& code() const noexcept { return code_; }
  static LanguageTag undetermined() { return LanguageTag("und"); }

  friend bool operator==(const LanguageTag&, const LanguageTag&) = default;
  friend auto operator<=>(const LanguageTag&, const LanguageTag&) = default;

 private:
  std::string code_ = "und";
};

enum class ErrorMode { fail_fast, skip_and_count };

/// Streaming JSONL reader. Each line must be an object with a string "text"
/// field, an optional "meta" object and an optional "id" (string or integer).
/// Records without an id get "{source}:{line}".
class JsonlReader {
 public:
  JsonlReader(std::istream& in, std::string source_name, ErrorMode mode = ErrorMode::fail_fast);

  /// Next document, or nullopt at end of stream. In fail_fast mode a
  /// malformed line throws FormatError carrying its line number.
  std::optional<Document> next();

  std::size_t malformed_count() const noexcept { return malformed_; }
  std::size_t line_number() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::string source_;
  ErrorMode mode_;
  std::size_t line_ = 0;
  std::size_t malformed_ = 0;
  std::string buffer_;
};

/// Parses one JSONL record; throws FormatError (without line info).
Document parse_record(std::string_view line, const std::string& fallback_id);
/// Serializes to a single line (no trailing newline).
std::string to_record(const Document& doc);

class JsonlWriter {
 public:
  explicit JsonlWriter(std::ostream& out) : out_(out) {}

  /// Throws IoError carrying the count written so far on stream failure.
  void write(const Document& doc);
  std::size_t written() const noexcept { return written_; }

 private:
  std::ostream& out_;
  std::size_t written_ = 0;
};

Dataset read_jsonl(std::istream& in, const std::string& source_name,
                   ErrorMode mode = ErrorMode::fail_fast, std::size_t* malformed = nullptr);
std::size_t write_jsonl(std::span<const Document> docs, std::ostream& out);

/// Opens `path` ("-" for stdin) and reads every document.
Dataset read_jsonl_file(const std::string& path, ErrorMode mode = ErrorMode::fail_fast,
                        std::size_t* malformed = nullptr);
std::size_t write_jsonl_file(std::span<const Document> docs, const std::string& path);

/// Stem of a path used as the default source name ("data/in.jsonl" -> "in").
std::string source_name_for(const std::string& path);

}  // namespace textmill
