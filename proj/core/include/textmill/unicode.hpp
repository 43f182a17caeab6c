#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace textmill::unicode {

inline constexpr char32_t kReplacementChar = 0xFFFD;

/// Decodes one scalar value starting at `pos`, advancing `pos`. Invalid or
/// truncated sequences yield U+FFFD and consume a single byte.
char32_t next_code_point(std::string_view s, std::size_t& pos) noexcept;

std::vector<char32_t> decode(std::string_view utf8);
void append_utf8(std::string& out, char32_t cp);
std::string encode(const std::u32string& cps);

/// Number of Unicode scalar values.
std::size_t length(std::string_view utf8) noexcept;

bool is_valid_utf8(std::string_view s) noexcept;
/// Replaces every invalid sequence with U+FFFD.
std::string sanitize_utf8(std::string_view s);

// Character properties (general categories via ICU).
bool is_letter(char32_t cp) noexcept;       // L*
bool is_mark(char32_t cp) noexcept;         // M*
bool is_digit(char32_t cp) noexcept;        // Nd
bool is_whitespace(char32_t cp) noexcept;   // White_Space property
bool is_punctuation(char32_t cp) noexcept;  // P*
bool is_control(char32_t cp) noexcept;      // Cc

/// Full Unicode lowercase mapping (root locale).
std::string to_lower(std::string_view utf8);

/// Splits on Unicode whitespace; empty tokens are never produced.
std::vector<std::string_view> split_whitespace(std::string_view utf8);

/// Converts bytes in `charset` to UTF-8. Returns nullopt if the charset name
/// is unknown. Unmappable sequences become U+FFFD.
std::optional<std::string> convert_to_utf8(std::string_view bytes, const std::string& charset);

}  // namespace textmill::unicode
