#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textmill/document.hpp"

namespace textmill::clean {

// Pattern lists used by the named cleaning functions.
const std::vector<std::string>& code_substrings();        // remove_lines_with_code
const std::vector<std::string>& html_span_substrings();   // remove_html_spans
const std::vector<std::string>& sanad_substrings();       // remove_html_spans_sanad
const std::vector<std::string>& wiki_mojibake_substrings();
const std::vector<std::string>& en_wiktionary_phrases();  // strip_substrings_en_wiktionary

std::string replace_newline_with_space(std::string_view text);

/// Drops every "\n"-delimited line containing any pattern.
std::string remove_lines_with_substrings(std::string_view text, std::span<const std::string> patterns);

/// Excises every occurrence of every phrase, left to right, repeating until
/// no phrase remains.
std::string strip_substrings(std::string_view text, std::span<const std::string> phrases);

/// Drops non-empty lines whose lowercase whitespace tokens contain fewer than
/// `min_ratio` stopwords. Blank lines are kept.
std::string remove_low_stopword_lines(std::string_view text, const std::vector<std::string>& stopwords,
                                      double min_ratio);

// Document predicates: true keeps the document.
bool keep_min_words(const Document& doc, std::size_t min_words = 15);
bool keep_min_bytes(const Document& doc, std::size_t min_bytes);
bool keep_nonempty(const Document& doc);
/// Drops documents whose meta "title" starts with "user" (any case).
bool keep_non_user_title(const Document& doc);
/// Drops documents whose meta "type" is present and not "text".
bool keep_text_type(const Document& doc);

struct TemplateLineOptions {
  std::size_t min_len = 15;   // code points, after trimming trailing whitespace
  std::size_t min_count = 10; // occurrences across the dataset
};

/// Removes, from every document, lines of at least min_len characters that
/// occur min_count or more times in the dataset. Documents are never dropped.
Dataset dedup_template_lines(const Dataset& docs, const TemplateLineOptions& opts, std::size_t threads = 1);

/// Domain of a document: meta "seed" when present, else the URL host, else "".
std::string domain_of(const Document& doc);

/// Within each domain, removes lines present on more than `max_page_fraction`
/// of its pages. Single-page domains and blank lines are left alone.
Dataset remove_menu_lines(const Dataset& docs, double max_page_fraction = 0.01, std::size_t threads = 1);

enum class KeyKind { text, url, url_amp, url_keep_id };

/// Empty key means "no key" and the document is always kept.
std::string dedup_key(const Document& doc, KeyKind kind);
std::string normalize_text_key(std::string_view text);
std::string normalize_url(std::string_view url, KeyKind kind);

/// Keeps the first document of every key. `removed_ids` receives the ids of
/// dropped documents when non-null.
Dataset dedup_exact(const Dataset& docs, KeyKind kind, std::vector<std::string>* removed_ids = nullptr);

/// One document: texts sorted by meta[key] (numbers numerically, otherwise as
/// strings), joined by "\n". Id and meta come from the first sorted document.
/// Throws FormatError when a document lacks the key.
Dataset sort_concat_by_meta(const Dataset& docs, const std::string& key);

/// Splits on "\n"; a trailing newline yields a final empty line.
std::vector<std::string_view> split_lines(std::string_view text);
std::string_view trim_trailing(std::string_view line) noexcept;

}  // namespace textmill::clean
