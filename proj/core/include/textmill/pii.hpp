#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace textmill::pii {

enum class Kind { email, user, ip_address, key };

/// Replacement word: "EMAIL", "USER", "IP_ADDRESS", "KEY".
std::string_view tag(Kind kind) noexcept;

struct Redaction {
  Kind kind;
  std::size_t start = 0;  // code-point offsets into the original text
  std::size_t end = 0;
  std::string original;

  friend bool operator==(const Redaction&, const Redaction&) = default;
};

struct RedactResult {
  std::string text;
  std::vector<Redaction> redactions;  // sorted, non-overlapping
};

/// Applies EMAIL, USER, IP_ADDRESS and KEY in that order. Each pass scans the
/// output of the previous one; a match touching an earlier replacement is
/// discarded.
RedactResult redact(std::string_view text);

/// Reinserts the originals; redact(x) followed by restore gives x back.
std::string restore(const RedactResult& result);

// Single-pattern matchers over ASCII structure. Each returns the end byte of
// the match starting exactly at `pos`, or nullopt.
std::optional<std::size_t> match_email(std::string_view s, std::size_t pos);
std::optional<std::size_t> match_user(std::string_view s, std::size_t pos);
std::optional<std::size_t> match_ipv4(std::string_view s, std::size_t pos);
std::optional<std::size_t> match_ipv6(std::string_view s, std::size_t pos);
std::optional<std::size_t> match_key(std::string_view s, std::size_t pos);

/// True for pure digit strings of at most four digits (years included).
bool is_simple_number(std::string_view s) noexcept;

nlohmann::json to_json(const Redaction& r, const std::string& doc_id);

}  // namespace textmill::pii
