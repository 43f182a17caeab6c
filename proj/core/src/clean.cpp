#include "textmill/clean.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "textmill/parallel.hpp"
#include "textmill/unicode.hpp"

namespace textmill::clean {

const std::vector<std::string>& code_substrings() {
  static const std::vector<std::string> v = {"{", "}", "[if", "<script"};
  return v;
}

const std::vector<std::string>& html_span_substrings() {
  static const std::vector<std::string> v = {"<span", "</span>", "<div", "<a", "</div>", "</a>", "br>"};
  return v;
}

const std::vector<std::string>& sanad_substrings() {
  static const std::vector<std::string> v = {
      "<img", "]]>", "<![CDATA", "//DW", "var ", "xtImg", "To view this video please enable JavaScript"};
  return v;
}

const std::vector<std::string>& wiki_mojibake_substrings() {
  static const std::vector<std::string> v = {"À À"};
  return v;
}

const std::vector<std::string>& en_wiktionary_phrases() {
  static const std::vector<std::string> v = {
      "This entry needs pronunciation information",
      "Please try to find a suitable image on Wikimedia Commons or upload one there yourself!This entry need "
      "pronunciation information",
      "You may continue to edit this entry while the discussion proceeds, but please mention significant edits at "
      "the RFD discussion and ensure that the intention of votes already cast is not left unclear",
      "This entry is part of the phrasebook project, which presents criteria for inclusion based on utility, "
      "simplicity and commonality",
      "If you are a native speaker with a microphone, please record some and upload them",
      "If you are familiar with the IPA then please add some!",
      "Feel free to edit this entry as normal, but do not remove {{rfv}} until the request has been resolved",
      "This entry needs quotations to illustrate usage",
      "If you are familiar with the IPA then please add some!This entry needs audio files",
      "Please see that page for discussion and justifications",
      "If you are familiar with the IPA or enPR then please add some!A user has added this entry to requests for "
      "verification(+) If it cannot be verified that this term meets our attestation criteria, it will be deleted",
      "This entry needs a photograph or drawing for illustration",
      "A user has added this entry to requests for deletion(+)",
      "Do not remove the {{rfd}} until the debate has finished",
      "This entry needs audio files",
      "If you come across any interesting, durably archived quotes then please add them!This entry is part of the "
      "phrasebook project, which presents criteria for inclusion based on utility, simplicity and commonality",
      "(For audio required quickly, visit WT:APR)",
  };
  return v;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (true) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string_view trim_trailing(std::string_view line) noexcept {
  std::size_t end = line.size();
  while (end > 0) {
    const char c = line[end - 1];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
      --end;
    } else {
      break;
    }
  }
  return line.substr(0, end);
}

namespace {

template <typename Keep>
std::string filter_lines(std::string_view text, Keep&& keep) {
  std::string out;
  out.reserve(text.size());
  bool first = true;
  for (auto line : split_lines(text)) {
    if (!keep(line)) continue;
    if (!first) out.push_back('\n');
    out.append(line);
    first = false;
  }
  return out;
}

bool is_blank(std::string_view line) { return unicode::split_whitespace(line).empty(); }

}  // namespace

std::string replace_newline_with_space(std::string_view text) {
  std::string out(text);
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

std::string remove_lines_with_substrings(std::string_view text, std::span<const std::string> patterns) {
  return filter_lines(text, [&](std::string_view line) {
    return std::none_of(patterns.begin(), patterns.end(), [&](const std::string& p) {
      return !p.empty() && line.find(p) != std::string_view::npos;
    });
  });
}

std::string strip_substrings(std::string_view text, std::span<const std::string> phrases) {
  std::string current(text);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& phrase : phrases) {
      if (phrase.empty()) continue;
      std::string next;
      std::size_t pos = 0;
      while (true) {
        const std::size_t hit = current.find(phrase, pos);
        if (hit == std::string::npos) break;
        next.append(current, pos, hit - pos);
        pos = hit + phrase.size();
        changed = true;
      }
      if (pos > 0) {
        next.append(current, pos, std::string::npos);
        current = std::move(next);
      }
    }
  }
  return current;
}

std::string remove_low_stopword_lines(std::string_view text, const std::vector<std::string>& stopwords,
                                      double min_ratio) {
  std::unordered_set<std::string> words;
  for (const auto& w : stopwords) words.insert(unicode::to_lower(w));
  return filter_lines(text, [&](std::string_view line) {
    const auto tokens = unicode::split_whitespace(line);
    if (tokens.empty()) return true;
    std::size_t hits = 0;
    for (auto t : tokens) hits += words.count(unicode::to_lower(t));
    return static_cast<double>(hits) / static_cast<double>(tokens.size()) >= min_ratio;
  });
}

bool keep_min_words(const Document& doc, std::size_t min_words) {
  return unicode::split_whitespace(doc.text).size() >= min_words;
}

bool keep_min_bytes(const Document& doc, std::size_t min_bytes) { return doc.byte_len() >= min_bytes; }

bool keep_nonempty(const Document& doc) { return !unicode::split_whitespace(doc.text).empty(); }

bool keep_non_user_title(const Document& doc) {
  const auto title = doc.meta_string("title");
  if (!title) return true;
  return unicode::to_lower(*title).rfind("user", 0) != 0;
}

bool keep_text_type(const Document& doc) {
  if (!doc.meta.is_object() || !doc.meta.contains("type")) return true;
  const auto type = doc.meta_string("type");
  return type && *type == "text";
}

Dataset dedup_template_lines(const Dataset& docs, const TemplateLineOptions& opts, std::size_t threads) {
  // Phase 1: per-chunk counts merged into one table.
  threads = std::min(resolve_threads(threads), std::max<std::size_t>(docs.size(), 1));
  std::vector<std::unordered_map<std::string_view, std::size_t>> partial(threads);
  const std::size_t chunk = (docs.size() + threads - 1) / std::max<std::size_t>(threads, 1);
  parallel_for(threads, threads, [&](std::size_t t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(docs.size(), begin + chunk);
    for (std::size_t i = begin; i < end; ++i) {
      for (auto line : split_lines(docs[i].text)) {
        line = trim_trailing(line);
        if (unicode::length(line) >= opts.min_len && !line.empty()) ++partial[t][line];
      }
    }
  });
  std::unordered_map<std::string_view, std::size_t> counts;
  for (auto& p : partial) {
    for (const auto& [line, c] : p) counts[line] += c;
  }
  // Phase 2: read-only application.
  Dataset out(docs);
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i].text = filter_lines(docs[i].text, [&](std::string_view line) {
      auto it = counts.find(trim_trailing(line));
      return it == counts.end() || it->second < opts.min_count;
    });
  });
  return out;
}

namespace {

std::string url_host(std::string_view url) {
  const std::size_t scheme = url.find("://");
  std::size_t start = scheme == std::string_view::npos ? 0 : scheme + 3;
  std::size_t end = url.find_first_of("/?#", start);
  if (end == std::string_view::npos) end = url.size();
  std::string_view host = url.substr(start, end - start);
  if (const auto at = host.rfind('@'); at != std::string_view::npos) host.remove_prefix(at + 1);
  if (const auto colon = host.find(':'); colon != std::string_view::npos) host = host.substr(0, colon);
  std::string out(host);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string domain_of(const Document& doc) {
  if (doc.meta.is_object() && doc.meta.contains(kMetaSeed) && !doc.meta.at(kMetaSeed).is_null()) {
    const auto& s = doc.meta.at(kMetaSeed);
    return s.is_string() ? s.get<std::string>() : s.dump();
  }
  if (const auto url = doc.meta_string(kMetaUrl)) return url_host(*url);
  return {};
}

Dataset remove_menu_lines(const Dataset& docs, double max_page_fraction, std::size_t threads) {
  std::vector<std::string> domains(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) { domains[i] = domain_of(docs[i]); });

  // Per-document distinct non-blank lines.
  std::vector<std::vector<std::string_view>> page_lines(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) {
    auto& lines = page_lines[i];
    for (auto line : split_lines(docs[i].text)) {
      line = trim_trailing(line);
      if (!is_blank(line)) lines.push_back(line);
    }
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
  });

  std::map<std::string_view, std::size_t> pages;
  std::map<std::string_view, std::unordered_map<std::string_view, std::size_t>> line_pages;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    ++pages[domains[i]];
    auto& table = line_pages[domains[i]];
    for (auto line : page_lines[i]) ++table[line];
  }

  Dataset out(docs);
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const std::size_t n = pages.at(domains[i]);
    if (n <= 1) return;
    const auto& table = line_pages.at(domains[i]);
    out[i].text = filter_lines(docs[i].text, [&](std::string_view line) {
      const auto key = trim_trailing(line);
      if (is_blank(key)) return true;
      const double fraction = static_cast<double>(table.at(key)) / static_cast<double>(n);
      return !(fraction > max_page_fraction);
    });
  });
  return out;
}

std::string normalize_text_key(std::string_view text) {
  std::string kept;
  kept.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = unicode::next_code_point(text, pos);
    if (unicode::is_whitespace(cp) || unicode::is_punctuation(cp)) continue;
    kept.append(text.substr(start, pos - start));
  }
  return unicode::to_lower(kept);
}

std::string normalize_url(std::string_view url, KeyKind kind) {
  if (const auto hash = url.find('#'); hash != std::string_view::npos) url = url.substr(0, hash);
  std::string_view query;
  if (const auto q = url.find('?'); q != std::string_view::npos) {
    query = url.substr(q + 1);
    url = url.substr(0, q);
  }
  std::string base(url);
  if (kind == KeyKind::url_amp) {
    while (!base.empty() && base.back() == '/') base.pop_back();
    if (base.size() >= 4 && base.compare(base.size() - 4, 4, "/amp") == 0) base.resize(base.size() - 4);
    while (!base.empty() && base.back() == '/') base.pop_back();
  }
  if (kind == KeyKind::url_keep_id && !query.empty()) {
    std::vector<std::string> ids;
    std::size_t start = 0;
    while (start <= query.size()) {
      std::size_t end = query.find('&', start);
      if (end == std::string_view::npos) end = query.size();
      const std::string_view param = query.substr(start, end - start);
      const auto eq = param.find('=');
      const std::string_view name = param.substr(0, eq);
      if (name == "id" || name == "new-id") {
        ids.push_back("id=" + std::string(eq == std::string_view::npos ? "" : param.substr(eq + 1)));
      }
      start = end + 1;
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) base += (i == 0 ? "?" : "&") + ids[i];
  }
  return base;
}

std::string dedup_key(const Document& doc, KeyKind kind) {
  if (kind == KeyKind::text) return normalize_text_key(doc.text);
  const auto url = doc.meta_string(kMetaUrl);
  return url ? normalize_url(*url, kind) : std::string();
}

Dataset dedup_exact(const Dataset& docs, KeyKind kind, std::vector<std::string>* removed_ids) {
  std::vector<std::string> keys(docs.size());
  parallel_for(docs.size(), 1, [&](std::size_t i) { keys[i] = dedup_key(docs[i], kind); });
  std::unordered_set<std::string_view> seen;
  Dataset out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (keys[i].empty() || seen.insert(keys[i]).second) {
      out.push_back(docs[i]);
    } else if (removed_ids) {
      removed_ids->push_back(docs[i].id);
    }
  }
  return out;
}

Dataset sort_concat_by_meta(const Dataset& docs, const std::string& key) {
  if (docs.empty()) return {};
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!docs[i].meta.is_object() || !docs[i].meta.contains(key))
      throw FormatError("document " + docs[i].id + " lacks meta key '" + key + "'");
    order[i] = i;
  }
  auto less = [&](std::size_t a, std::size_t b) {
    const auto& x = docs[a].meta.at(key);
    const auto& y = docs[b].meta.at(key);
    if (x.is_number() && y.is_number()) return x.get<double>() < y.get<double>();
    if (x.is_number() != y.is_number()) return x.is_number();
    const std::string sx = x.is_string() ? x.get<std::string>() : x.dump();
    const std::string sy = y.is_string() ? y.get<std::string>() : y.dump();
    return sx < sy;
  };
  std::stable_sort(order.begin(), order.end(), less);
  Document merged = docs[order.front()];
  merged.text.clear();
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) merged.text.push_back('\n');
    merged.text += docs[order[i]].text;
  }
  return {merged};
}

}  // namespace textmill::clean
