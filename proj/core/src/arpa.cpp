#include "textmill/arpa.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace textmill::lm {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace

std::string ArpaModel::pack(std::span<const std::uint32_t> ids) {
  std::string key(ids.size() * sizeof(std::uint32_t), '\0');
  std::memcpy(key.data(), ids.data(), key.size());
  return key;
}

bool ArpaModel::in_vocab(std::string_view token) const {
  return word_ids_.find(std::string(token)) != word_ids_.end();
}

const NgramEntry* ArpaModel::find_ids(std::span<const std::uint32_t> ids) const {
  if (ids.empty() || ids.size() > orders_.size()) return nullptr;
  const Order& order = orders_[ids.size() - 1];
  auto it = order.index.find(pack(ids));
  return it == order.index.end() ? nullptr : &order.entries[it->second];
}

const NgramEntry* ArpaModel::find(std::span<const std::string> ngram) const {
  std::vector<std::uint32_t> ids;
  ids.reserve(ngram.size());
  for (const auto& w : ngram) {
    auto it = word_ids_.find(w);
    if (it == word_ids_.end()) return nullptr;
    ids.push_back(it->second);
  }
  return find_ids(ids);
}

void ArpaModel::add(std::span<const std::string> ngram, double log10_prob, std::optional<double> log10_backoff) {
  if (ngram.empty()) throw FormatError("empty n-gram");
  if (log10_prob > 0) throw FormatError("positive log10 probability " + format_double(log10_prob));
  const std::size_t n = ngram.size();
  if (orders_.size() < n) orders_.resize(n);
  std::vector<std::uint32_t> ids;
  ids.reserve(n);
  if (n == 1) {
    if (word_ids_.count(ngram[0])) throw FormatError("duplicate unigram '" + ngram[0] + "'");
    const auto id = static_cast<std::uint32_t>(words_.size());
    words_.push_back(ngram[0]);
    word_ids_.emplace(ngram[0], id);
    if (ngram[0] == kUnk) unk_ = id;
    ids.push_back(id);
  } else {
    for (const auto& w : ngram) {
      auto it = word_ids_.find(w);
      if (it == word_ids_.end()) throw FormatError("n-gram word '" + w + "' has no unigram entry");
      ids.push_back(it->second);
    }
  }
  Order& order = orders_[n - 1];
  std::string key = pack(ids);
  if (order.index.count(key)) throw FormatError("duplicate " + std::to_string(n) + "-gram");
  order.index.emplace(std::move(key), order.entries.size());
  order.entries.push_back(NgramEntry{std::move(ids), log10_prob, log10_backoff});
}

std::uint32_t ArpaModel::lookup(std::string_view token) const {
  auto it = word_ids_.find(std::string(token));
  if (it != word_ids_.end()) return it->second;
  if (unk_) return *unk_;
  throw VocabularyError(std::string(token));
}

double ArpaModel::conditional(std::span<const std::uint32_t> history, std::uint32_t word) const {
  const std::size_t max_ctx = std::min(history.size(), orders_.size() - 1);
  std::vector<std::uint32_t> key;
  key.reserve(max_ctx + 1);
  double backoff = 0.0;
  for (std::size_t ctx = max_ctx + 1; ctx-- > 0;) {
    key.assign(history.end() - static_cast<std::ptrdiff_t>(ctx), history.end());
    key.push_back(word);
    if (const NgramEntry* e = find_ids(key)) return backoff + e->log10_prob;
    if (ctx > 0) {
      key.pop_back();
      if (const NgramEntry* c = find_ids(key); c && c->log10_backoff) backoff += *c->log10_backoff;
    }
  }
  // Unreachable for a well-formed model: every id has a unigram.
  throw VocabularyError(words_.at(word));
}

double ArpaModel::score(std::span<const std::string> tokens, BoundaryMode mode) const {
  if (orders_.empty()) throw ConfigError("empty language model");
  std::vector<std::uint32_t> history;
  const std::size_t keep = orders_.size() - 1;
  auto push = [&](std::uint32_t id) {
    history.push_back(id);
    if (history.size() > keep) history.erase(history.begin());
  };
  double total = 0.0;
  if (mode == BoundaryMode::sentence) {
    auto bos = word_ids_.find(std::string(kBos));
    if (bos == word_ids_.end()) throw VocabularyError(std::string(kBos));
    push(bos->second);
  }
  for (const auto& tok : tokens) {
    const std::uint32_t id = lookup(tok);
    total += conditional(history, id);
    if (keep > 0) push(id);
  }
  if (mode == BoundaryMode::sentence) {
    auto eos = word_ids_.find(std::string(kEos));
    if (eos == word_ids_.end()) throw VocabularyError(std::string(kEos));
    total += conditional(history, eos->second);
  }
  return total;
}

std::size_t ArpaModel::scored_positions(std::size_t n_tokens, BoundaryMode mode) noexcept {
  return mode == BoundaryMode::sentence ? n_tokens + 1 : n_tokens;
}

double ArpaModel::perplexity(std::span<const std::string> tokens, BoundaryMode mode) const {
  const std::size_t positions = scored_positions(tokens.size(), mode);
  if (positions == 0) throw ConfigError("perplexity of an empty token sequence");
  const double s = score(tokens, mode);
  return std::pow(10.0, -s / static_cast<double>(positions));
}

void ArpaModel::write_arpa(std::ostream& out) const {
  out << "\\data\\\n";
  for (std::size_t n = 0; n < orders_.size(); ++n) out << "ngram " << n + 1 << "=" << orders_[n].entries.size() << "\n";
  for (std::size_t n = 0; n < orders_.size(); ++n) {
    out << "\n\\" << n + 1 << "-grams:\n";
    for (const auto& e : orders_[n].entries) {
      out << format_double(e.log10_prob) << '\t';
      for (std::size_t i = 0; i < e.words.size(); ++i) {
        if (i) out << ' ';
        out << words_[e.words[i]];
      }
      if (e.log10_backoff) out << '\t' << format_double(*e.log10_backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

bool operator==(const ArpaModel& a, const ArpaModel& b) {
  if (a.words_ != b.words_ || a.orders_.size() != b.orders_.size()) return false;
  for (std::size_t n = 0; n < a.orders_.size(); ++n) {
    const auto& ea = a.orders_[n].entries;
    const auto& eb = b.orders_[n].entries;
    if (ea.size() != eb.size()) return false;
    for (std::size_t i = 0; i < ea.size(); ++i) {
      if (ea[i].words != eb[i].words || ea[i].log10_prob != eb[i].log10_prob ||
          ea[i].log10_backoff != eb[i].log10_backoff)
        return false;
    }
  }
  return true;
}

ArpaModel load_arpa(std::istream& in) {
  ArpaModel model;
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  // Header: skip anything before \data\.
  bool found_data = false;
  while (next_line()) {
    if (line == "\\data\\") {
      found_data = true;
      break;
    }
  }
  if (!found_data) throw FormatError("missing \\data\\ section", lineno == 0 ? std::nullopt : std::optional(lineno));

  std::vector<std::size_t> declared;
  bool in_section = false;
  while (next_line()) {
    if (line.empty()) continue;
    if (line.rfind("ngram ", 0) == 0) {
      const std::size_t eq = line.find('=');
      std::size_t order = 0;
      std::size_t count = 0;
      if (eq == std::string::npos) throw FormatError("malformed ngram count line", lineno);
      const std::string_view o = std::string_view(line).substr(6, eq - 6);
      const std::string_view c = std::string_view(line).substr(eq + 1);
      auto r1 = std::from_chars(o.data(), o.data() + o.size(), order);
      auto r2 = std::from_chars(c.data(), c.data() + c.size(), count);
      if (r1.ec != std::errc() || r2.ec != std::errc() || order == 0 || order != declared.size() + 1)
        throw FormatError("malformed ngram count line", lineno);
      declared.push_back(count);
      continue;
    }
    if (line.front() == '\\') {
      in_section = true;
      break;
    }
    throw FormatError("unexpected line in \\data\\ section", lineno);
  }
  if (declared.empty()) throw FormatError("no ngram counts declared", lineno);
  if (!in_section) throw FormatError("missing \\1-grams: section", lineno);

  std::size_t current = 0;
  std::vector<std::size_t> seen(declared.size(), 0);
  bool ended = false;
  auto start_section = [&]() {
    if (line == "\\end\\") {
      ended = true;
      return;
    }
    const std::string expected = "\\" + std::to_string(current + 1) + "-grams:";
    if (line != expected) throw FormatError("expected '" + expected + "'", lineno);
    ++current;
  };
  start_section();
  std::vector<std::string> words;
  while (!ended && next_line()) {
    if (line.empty()) continue;
    if (line.front() == '\\') {
      if (seen[current - 1] != declared[current - 1])
        throw FormatError(std::to_string(current) + "-gram count mismatch: declared " +
                              std::to_string(declared[current - 1]) + ", found " + std::to_string(seen[current - 1]),
                          lineno);
      start_section();
      if (!ended && current > declared.size()) throw FormatError("section beyond declared orders", lineno);
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != current + 1 && fields.size() != current + 2)
      throw FormatError("expected " + std::to_string(current) + " words", lineno);
    const auto prob = parse_double(fields[0]);
    if (!prob) throw FormatError("non-numeric probability '" + std::string(fields[0]) + "'", lineno);
    std::optional<double> backoff;
    if (fields.size() == current + 2) {
      backoff = parse_double(fields.back());
      if (!backoff) throw FormatError("non-numeric back-off '" + std::string(fields.back()) + "'", lineno);
    }
    words.assign(fields.begin() + 1, fields.begin() + 1 + static_cast<std::ptrdiff_t>(current));
    try {
      model.add(words, *prob, backoff);
    } catch (const FormatError& e) {
      throw FormatError(e.what(), lineno);
    }
    ++seen[current - 1];
  }
  if (!ended) throw FormatError("missing \\end\\ marker", lineno);
  if (current != declared.size()) throw FormatError("missing " + std::to_string(current + 1) + "-gram section", lineno);
  return model;
}

ArpaModel load_arpa_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return load_arpa(in);
}

}  // namespace textmill::lm
