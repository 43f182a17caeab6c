#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace textmill::html {

/// Element or text node. Elements carry a lowercase tag; text nodes carry
/// entity-decoded UTF-8 content and are always leaves.
struct DomNode {
  enum class Kind { element, text };

  Kind kind = Kind::element;
  std::string tag;
  std::vector<DomNode> children;
  std::string content;

  static DomNode element(std::string tag, std::vector<DomNode> children = {});
  static DomNode text(std::string content);

  bool is_text() const noexcept { return kind == Kind::text; }

  friend bool operator==(const DomNode&, const DomNode&) = default;
};

/// Tag name of the synthetic root returned by parse_html.
inline constexpr std::string_view kDocumentTag = "#document";

enum class TagClass { block, inline_, other };

/// Block wins for tags the two lists share (address, tbody).
TagClass classify_tag(std::string_view name) noexcept;

const std::vector<std::string_view>& block_tags();
const std::vector<std::string_view>& inline_tags();

/// Converts the raw body to UTF-8: declared charset, then a <meta> charset in
/// the first 1024 bytes, then UTF-8 with U+FFFD replacement.
std::string decode_body(std::string_view body, const std::optional<std::string>& declared_charset);

/// Lenient parse. Never fails. Comments, doctypes and processing
/// instructions are dropped; <script>/<style>/<textarea>/<title> hold raw
/// text; p, li, tr, td (and th, dt, dd, option) close an open element of the
/// same tag; stray end tags are ignored; everything left open is closed at
/// end of input.
DomNode parse_html(std::string_view body, const std::optional<std::string>& declared_charset = std::nullopt);

/// Subtrees removed unconditionally during minification.
const std::vector<std::string_view>& forbidden_tags();
/// Tags whose subtree is removed when its text is shorter than the threshold.
const std::vector<std::string_view>& short_content_tags();
inline constexpr std::size_t kMinBlockChars = 64;

/// Concatenated raw text of a subtree.
std::string text_content(const DomNode& node);

DomNode minify(const DomNode& dom, std::size_t min_chars = kMinBlockChars);

/// Depth-first text reconstruction with block/inline separation.
std::string extract_text(const DomNode& dom);

/// parse_html -> minify -> extract_text.
std::string html_to_text(std::string_view body, const std::optional<std::string>& declared_charset = std::nullopt,
                         bool apply_minify = true);

}  // namespace textmill::html
