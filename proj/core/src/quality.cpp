#include "textmill/quality.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "textmill/unicode.hpp"

namespace textmill::quality {

namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

void normalize_line(std::string_view line, std::size_t max_word_len, std::string& out) {
  // Drop control characters, turning tabs and other whitespace controls into spaces.
  std::string clean;
  clean.reserve(line.size());
  std::size_t pos = 0;
  while (pos < line.size()) {
    const std::size_t start = pos;
    const char32_t cp = unicode::next_code_point(line, pos);
    if (unicode::is_control(cp)) {
      if (unicode::is_whitespace(cp)) clean.push_back(' ');
      continue;
    }
    clean.append(line.substr(start, pos - start));
  }
  bool first = true;
  for (auto tok : unicode::split_whitespace(clean)) {
    if (is_url_token(tok) || unicode::length(tok) > max_word_len) continue;
    if (!first) out.push_back(' ');
    out.append(tok);
    first = false;
  }
}

std::string lower_copy(const std::string& s) { return unicode::to_lower(s); }

double membership_ratio(std::span<const std::string> tokens, const WordSet& words) {
  if (tokens.empty() || words.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    if (words.count(t) || words.count(lower_copy(t))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

RepetitionCounts top_k(std::vector<std::uint64_t>& counts, std::uint64_t total) {
  RepetitionCounts r;
  r.distinct = counts.size();
  r.k = static_cast<std::uint64_t>(std::floor(std::sqrt(static_cast<double>(r.distinct))));
  while ((r.k + 1) * (r.k + 1) <= r.distinct) ++r.k;
  while (r.k * r.k > r.distinct) --r.k;
  std::partial_sort(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(r.k), counts.end(),
                    std::greater<>());
  for (std::uint64_t i = 0; i < r.k; ++i) r.top += counts[i];
  r.total = total;
  return r;
}

}  // namespace

bool is_url_token(std::string_view token) noexcept {
  return starts_with_ci(token, "http://") || starts_with_ci(token, "https://") || starts_with_ci(token, "ftp://") ||
         starts_with_ci(token, "www.") || token.find("://") != std::string_view::npos;
}

std::string normalize_doc(std::string_view text, std::size_t max_word_len) {
  std::string out;
  out.reserve(text.size());
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of("\r\n", start);
    if (end == std::string_view::npos) end = text.size();
    normalize_line(text.substr(start, end - start), max_word_len, out);
    if (end == text.size()) break;
    out.push_back('\n');
    start = end + ((text[end] == '\r' && end + 1 < text.size() && text[end + 1] == '\n') ? 2 : 1);
  }
  const auto b = out.find_first_not_of(" \n");
  if (b == std::string::npos) return {};
  const auto e = out.find_last_not_of(" \n");
  return out.substr(b, e - b + 1);
}

std::vector<std::string> tokenize_words(std::string_view text, std::string_view language,
                                        const WordTokenizer& tokenizer, bool lowercase) {
  std::vector<std::string> tokens = tokenizer.tokenize(text);
  if (language == "vi") {
    const std::size_t n = tokens.size();
    for (std::size_t w = 2; w <= 3; ++w) {
      for (std::size_t i = 0; i + w <= n; ++i) {
        std::string joined = tokens[i];
        for (std::size_t j = 1; j < w; ++j) {
          joined.push_back(' ');
          joined += tokens[i + j];
        }
        tokens.push_back(std::move(joined));
      }
    }
  }
  if (lowercase) {
    for (auto& t : tokens) t = unicode::to_lower(t);
  }
  return tokens;
}

RepetitionCounts char_repetition(std::string_view text, std::size_t n) {
  if (n == 0) throw ConfigError("n-gram order must be at least 1");
  const std::u32string cps = [&] {
    auto v = unicode::decode(text);
    return std::u32string(v.begin(), v.end());
  }();
  if (cps.size() < n) return {};
  std::unordered_map<std::u32string_view, std::uint64_t> grams;
  const std::u32string_view view(cps);
  const std::size_t total = cps.size() - n + 1;
  grams.reserve(total);
  for (std::size_t i = 0; i < total; ++i) ++grams[view.substr(i, n)];
  std::vector<std::uint64_t> counts;
  counts.reserve(grams.size());
  for (const auto& [g, c] : grams) counts.push_back(c);
  return top_k(counts, total);
}

double char_repetition_ratio(std::string_view text, std::size_t n) { return char_repetition(text, n).ratio(); }

RepetitionCounts word_repetition(std::span<const std::string> tokens, std::size_t n) {
  if (n == 0) throw ConfigError("n-gram order must be at least 1");
  RepetitionCounts r;
  if (tokens.size() < n) return r;
  std::unordered_map<std::string_view, std::uint32_t> ids;
  std::vector<std::uint32_t> seq;
  seq.reserve(tokens.size());
  for (const auto& t : tokens) seq.push_back(ids.emplace(t, static_cast<std::uint32_t>(ids.size())).first->second);
  std::unordered_map<std::string, std::uint64_t> grams;
  const std::size_t total = tokens.size() - n + 1;
  for (std::size_t i = 0; i < total; ++i) {
    std::string key(reinterpret_cast<const char*>(seq.data() + i), n * sizeof(std::uint32_t));
    ++grams[std::move(key)];
  }
  r.distinct = grams.size();
  r.total = total;
  for (const auto& [g, c] : grams) {
    if (c >= 2) r.top += c;
  }
  return r;
}

double word_repetition_ratio(std::span<const std::string> tokens, std::size_t n) {
  return word_repetition(tokens, n).ratio();
}

SpecialCharSet SpecialCharSet::of(std::string_view chars) {
  SpecialCharSet s;
  s.default_ = false;
  auto cps = unicode::decode(chars);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  s.chars_.assign(cps.begin(), cps.end());
  return s;
}

bool SpecialCharSet::contains(char32_t cp) const {
  if (!default_) return std::binary_search(chars_.begin(), chars_.end(), cp);
  static constexpr std::u32string_view kAllowed = U".,!?'\";:-()";
  if (kAllowed.find(cp) != std::u32string_view::npos) return false;
  return !(unicode::is_letter(cp) || unicode::is_mark(cp) || unicode::is_digit(cp) || unicode::is_whitespace(cp));
}

std::string SpecialCharSet::chars() const { return unicode::encode(chars_); }

double special_char_ratio(std::string_view text, const SpecialCharSet& set) {
  std::size_t total = 0;
  std::size_t special = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = unicode::next_code_point(text, pos);
    ++total;
    if (set.contains(cp)) ++special;
  }
  return total == 0 ? 0.0 : static_cast<double>(special) / static_cast<double>(total);
}

double closed_class_ratio(std::span<const std::string> tokens, const WordSet& words) {
  return membership_ratio(tokens, words);
}

double flagged_word_ratio(std::span<const std::string> tokens, const WordSet& words) {
  return membership_ratio(tokens, words);
}

LanguageGuess ClosedClassScorer::identify(std::string_view text) const {
  LanguageGuess best;
  std::vector<std::string> tokens;
  for (auto t : unicode::split_whitespace(text)) tokens.push_back(unicode::to_lower(t));
  if (tokens.empty()) return best;
  for (const auto& [lang, words] : lists_) {
    std::size_t hits = 0;
    for (const auto& t : tokens) hits += words.count(t);
    const double ratio = static_cast<double>(hits) / static_cast<double>(tokens.size());
    if (ratio > best.confidence) best = {lang, ratio};
  }
  return best;
}

LanguageGuess langid_conf(std::string_view text, const LanguageScorer& scorer) {
  if (text.empty()) return {};
  LanguageGuess g = scorer.identify(text);
  g.confidence = std::clamp(g.confidence, 0.0, 1.0);
  if (g.confidence == 0.0) g.language = "und";
  return g;
}

std::string_view to_string(Indicator ind) noexcept {
  switch (ind) {
    case Indicator::min_words: return "min_words";
    case Indicator::char_rep: return "char_rep";
    case Indicator::word_rep: return "word_rep";
    case Indicator::special: return "special";
    case Indicator::closed: return "closed";
    case Indicator::flagged: return "flagged";
    case Indicator::langid: return "langid";
    case Indicator::perplexity: return "perplexity";
  }
  return "unknown";
}

std::optional<Indicator> parse_indicator(std::string_view name) noexcept {
  for (auto ind : kIndicators) {
    if (to_string(ind) == name) return ind;
  }
  if (name == "n_words") return Indicator::min_words;
  if (name == "char_rep_ratio") return Indicator::char_rep;
  if (name == "word_rep_ratio") return Indicator::word_rep;
  if (name == "special_ratio") return Indicator::special;
  if (name == "closed_ratio") return Indicator::closed;
  if (name == "flagged_ratio") return Indicator::flagged;
  if (name == "langid_conf") return Indicator::langid;
  return std::nullopt;
}

std::optional<double> FilterConfig::threshold(Indicator ind) const {
  switch (ind) {
    case Indicator::min_words: return min_words;
    case Indicator::char_rep: return char_rep_max;
    case Indicator::word_rep: return word_rep_max;
    case Indicator::special: return special_max;
    case Indicator::closed: return closed_min;
    case Indicator::flagged: return flagged_max;
    case Indicator::langid: return langid_min;
    case Indicator::perplexity: return ppl_max;
  }
  return std::nullopt;
}

void FilterConfig::set_threshold(Indicator ind, std::optional<double> value) {
  switch (ind) {
    case Indicator::min_words: min_words = value; break;
    case Indicator::char_rep: char_rep_max = value; break;
    case Indicator::word_rep: word_rep_max = value; break;
    case Indicator::special: special_max = value; break;
    case Indicator::closed: closed_min = value; break;
    case Indicator::flagged: flagged_max = value; break;
    case Indicator::langid: langid_min = value; break;
    case Indicator::perplexity: ppl_max = value; break;
  }
}

void FilterConfig::validate() const {
  auto fail = [&](const std::string& what) { throw ConfigError("filter config '" + language + "': " + what); };
  if (char_rep_n == 0 || word_rep_n == 0) fail("n-gram order must be at least 1");
  if (max_word_len == 0) fail("max_word_len must be positive");
  if (min_words && (*min_words < 0 || std::isnan(*min_words))) fail("min_words must be >= 0");
  for (auto ind : {Indicator::char_rep, Indicator::word_rep, Indicator::special, Indicator::closed,
                   Indicator::flagged}) {
    if (auto t = threshold(ind); t && !(*t >= 0.0 && *t <= 1.0))
      fail(std::string(to_string(ind)) + " ratio must be in [0,1]");
  }
  // langid_min may exceed 1 to reject everything.
  if (langid_min && !(*langid_min >= 0.0)) fail("langid threshold must be >= 0");
  if (ppl_max && !(*ppl_max > 0.0)) fail("perplexity threshold must be positive");
}

std::optional<double> FilterValues::value(Indicator ind) const {
  switch (ind) {
    case Indicator::min_words: return static_cast<double>(n_words);
    case Indicator::char_rep: return char_rep_ratio;
    case Indicator::word_rep: return word_rep_ratio;
    case Indicator::special: return special_ratio;
    case Indicator::closed: return closed_ratio;
    case Indicator::flagged: return flagged_ratio;
    case Indicator::langid: return langid_conf;
    case Indicator::perplexity: return perplexity;
  }
  return std::nullopt;
}

FilterValues compute_values(const Document& doc, const FilterConfig& config, const Scorers& scorers) {
  if (!scorers.tokenizer) throw ConfigError("no tokenizer for language '" + config.language + "'");
  FilterValues v;
  const std::string text = normalize_doc(doc.text, config.max_word_len);
  const std::vector<std::string> tokens = scorers.tokenizer->tokenize(text);
  const std::vector<std::string> lowered = tokenize_words(text, config.language, *scorers.tokenizer, true);
  v.n_words = tokens.size();
  v.char_rep_ratio = char_repetition_ratio(text, config.char_rep_n);
  v.word_rep_ratio = word_repetition_ratio(tokens, config.word_rep_n);
  v.special_ratio = special_char_ratio(text, config.special_set);
  v.closed_ratio = closed_class_ratio(lowered, config.closed_words);
  v.flagged_ratio = flagged_word_ratio(lowered, config.flagged_words);
  if (scorers.langid) {
    const LanguageGuess g = langid_conf(text, *scorers.langid);
    v.language = g.language;
    v.langid_conf = g.confidence;
  }
  if (scorers.lm && !tokens.empty()) v.perplexity = scorers.lm->perplexity(tokens);
  return v;
}

Verdict apply_filters(const FilterValues& values, const FilterConfig& config) {
  Verdict verdict;
  for (auto ind : kIndicators) {
    const auto t = config.threshold(ind);
    const auto v = values.value(ind);
    if (!t || !v) continue;
    bool fail = false;
    switch (ind) {
      case Indicator::min_words:
      case Indicator::closed:
      case Indicator::langid: fail = *v < *t; break;
      default: fail = *v > *t; break;
    }
    if (fail) verdict.failed.push_back(ind);
  }
  verdict.kept = verdict.failed.empty();
  return verdict;
}

WordSet read_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open word list " + path);
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto parts = unicode::split_whitespace(line);
    if (parts.empty()) continue;
    words.insert(unicode::to_lower(line.substr(static_cast<std::size_t>(parts.front().data() - line.data()),
                                               static_cast<std::size_t>(parts.back().data() + parts.back().size() -
                                                                        parts.front().data()))));
  }
  return words;
}

namespace {

std::optional<double> opt_number(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

std::size_t size_field(const nlohmann::json& j, const char* key, std::size_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_unsigned() || j.at(key).get<std::size_t>() == 0)
    throw ConfigError(where + "." + key + ": expected a positive integer");
  return j.at(key).get<std::size_t>();
}

const nlohmann::json& object_field(const nlohmann::json& j, const char* key, const std::string& where) {
  static const nlohmann::json kEmpty = nlohmann::json::object();
  if (!j.contains(key)) return kEmpty;
  if (!j.at(key).is_object()) throw ConfigError(where + "." + key + ": expected an object");
  return j.at(key);
}

WordSet word_field(const nlohmann::json& j, const std::string& where, const std::filesystem::path& base) {
  WordSet words;
  if (j.contains("words")) {
    if (!j.at("words").is_array()) throw ConfigError(where + ".words: expected an array of strings");
    for (const auto& w : j.at("words")) {
      if (!w.is_string()) throw ConfigError(where + ".words: expected an array of strings");
      words.insert(unicode::to_lower(w.get<std::string>()));
    }
  }
  if (j.contains("words_file")) {
    if (!j.at("words_file").is_string()) throw ConfigError(where + ".words_file: expected a path");
    std::filesystem::path p = j.at("words_file").get<std::string>();
    if (p.is_relative()) p = base / p;
    WordSet file_words = read_word_list(p.string());
    words.insert(file_words.begin(), file_words.end());
  }
  return words;
}

FilterConfig parse_config(const std::string& lang, const nlohmann::json& j, const std::filesystem::path& base) {
  const std::string where = lang;
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  FilterConfig c;
  c.language = lang;
  if (j.contains("tokenizer")) {
    if (!j.at("tokenizer").is_string()) throw ConfigError(where + ".tokenizer: expected a string");
    c.tokenizer = j.at("tokenizer").get<std::string>();
  }
  c.max_word_len = size_field(j, "max_word_len", kDefaultMaxWordLen, where);
  c.min_words = opt_number(j, "min_words", where);

  const auto& cr = object_field(j, "char_rep", where);
  c.char_rep_n = size_field(cr, "n", kDefaultCharRepN, where + ".char_rep");
  c.char_rep_max = opt_number(cr, "max_ratio", where + ".char_rep");

  const auto& wr = object_field(j, "word_rep", where);
  c.word_rep_n = size_field(wr, "n", kDefaultWordRepN, where + ".word_rep");
  c.word_rep_max = opt_number(wr, "max_ratio", where + ".word_rep");

  const auto& sp = object_field(j, "special", where);
  c.special_max = opt_number(sp, "max_ratio", where + ".special");
  if (sp.contains("chars")) {
    if (!sp.at("chars").is_string()) throw ConfigError(where + ".special.chars: expected a string");
    c.special_set = SpecialCharSet::of(sp.at("chars").get<std::string>());
  }

  const auto& cl = object_field(j, "closed", where);
  c.closed_min = opt_number(cl, "min_ratio", where + ".closed");
  c.closed_words = word_field(cl, where + ".closed", base);

  const auto& fl = object_field(j, "flagged", where);
  c.flagged_max = opt_number(fl, "max_ratio", where + ".flagged");
  c.flagged_words = word_field(fl, where + ".flagged", base);

  const auto& li = object_field(j, "langid", where);
  c.langid_min = opt_number(li, "min_conf", where + ".langid");

  const auto& pp = object_field(j, "perplexity", where);
  c.ppl_max = opt_number(pp, "max", where + ".perplexity");
  if (pp.contains("model")) {
    if (!pp.at("model").is_string()) throw ConfigError(where + ".perplexity.model: expected a path");
    std::filesystem::path p = pp.at("model").get<std::string>();
    if (p.is_relative()) p = base / p;
    c.lm_path = p.string();
  }
  c.validate();
  make_tokenizer(c.tokenizer);  // fail early on unknown names
  return c;
}

nlohmann::json sorted_words(const WordSet& words) {
  std::vector<std::string> v(words.begin(), words.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

FilterConfigSet FilterConfigSet::from_json(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("filter config must be an object keyed by language");
  FilterConfigSet set;
  for (const auto& [lang, cfg] : j.items()) {
    LanguageTag tag(lang);  // validates the key
    set.add(parse_config(tag.code(), cfg, base_dir));
  }
  return set;
}

FilterConfigSet FilterConfigSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open filter config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("filter config " + path + ": " + e.what());
  }
  const auto parent = std::filesystem::path(path).parent_path();
  return from_json(j, parent.empty() ? "." : parent.string());
}

nlohmann::json FilterConfigSet::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [lang, c] : configs_) {
    nlohmann::json j;
    j["tokenizer"] = c.tokenizer;
    j["max_word_len"] = c.max_word_len;
    if (c.min_words) j["min_words"] = *c.min_words;
    j["char_rep"] = {{"n", c.char_rep_n}};
    if (c.char_rep_max) j["char_rep"]["max_ratio"] = *c.char_rep_max;
    j["word_rep"] = {{"n", c.word_rep_n}};
    if (c.word_rep_max) j["word_rep"]["max_ratio"] = *c.word_rep_max;
    j["special"] = nlohmann::json::object();
    if (c.special_max) j["special"]["max_ratio"] = *c.special_max;
    if (!c.special_set.is_default()) j["special"]["chars"] = c.special_set.chars();
    j["closed"] = {{"words", sorted_words(c.closed_words)}};
    if (c.closed_min) j["closed"]["min_ratio"] = *c.closed_min;
    j["flagged"] = {{"words", sorted_words(c.flagged_words)}};
    if (c.flagged_max) j["flagged"]["max_ratio"] = *c.flagged_max;
    j["langid"] = nlohmann::json::object();
    if (c.langid_min) j["langid"]["min_conf"] = *c.langid_min;
    j["perplexity"] = nlohmann::json::object();
    if (c.ppl_max) j["perplexity"]["max"] = *c.ppl_max;
    if (!c.lm_path.empty()) j["perplexity"]["model"] = std::filesystem::absolute(c.lm_path).string();
    out[lang] = std::move(j);
  }
  return out;
}

void FilterConfigSet::add(FilterConfig config) {
  config.validate();
  if (!config.lm_path.empty() && !models_.count(config.lm_path)) {
    models_[config.lm_path] = std::make_shared<const lm::ArpaModel>(lm::load_arpa_file(config.lm_path));
  }
  configs_[config.language] = std::move(config);
  rebuild_langid();
}

void FilterConfigSet::rebuild_langid() {
  std::map<std::string, WordSet> lists;
  for (const auto& [lang, c] : configs_) {
    if (lang != "default" && !c.closed_words.empty()) lists[lang] = c.closed_words;
  }
  langid_ = lists.empty() ? nullptr : std::make_shared<const ClosedClassScorer>(std::move(lists));
}

const FilterConfig* FilterConfigSet::find(std::string_view language) const {
  auto it = configs_.find(std::string(language));
  if (it != configs_.end()) return &it->second;
  it = configs_.find("default");
  return it == configs_.end() ? nullptr : &it->second;
}

const FilterConfig& FilterConfigSet::get(std::string_view language) const {
  const FilterConfig* c = find(language);
  if (!c) throw ConfigError("no filter config for language '" + std::string(language) + "'");
  return *c;
}

Scorers FilterConfigSet::scorers_for(const FilterConfig& config) const {
  Scorers s;
  s.tokenizer = make_tokenizer(config.tokenizer);
  if (!config.lm_path.empty()) {
    auto it = models_.find(config.lm_path);
    if (it != models_.end()) s.lm = it->second;
  }
  s.langid = langid_;
  return s;
}

std::string FilterConfigSet::language_of(const Document& doc) {
  auto lang = doc.meta_string(kMetaLanguage);
  return lang && !lang->empty() ? *lang : "und";
}

nlohmann::json to_json(const FilterValues& v) {
  nlohmann::json j;
  j["n_words"] = v.n_words;
  j["char_rep_ratio"] = v.char_rep_ratio;
  j["word_rep_ratio"] = v.word_rep_ratio;
  j["special_ratio"] = v.special_ratio;
  j["closed_ratio"] = v.closed_ratio;
  j["flagged_ratio"] = v.flagged_ratio;
  j["langid_conf"] = v.langid_conf;
  j["language"] = v.language;
  j["perplexity"] = v.perplexity ? nlohmann::json(*v.perplexity) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json failed = nlohmann::json::array();
  for (auto ind : v.failed) failed.push_back(std::string(to_string(ind)));
  return {{"kept", v.kept}, {"failed", failed}};
}

}  // namespace textmill::quality
