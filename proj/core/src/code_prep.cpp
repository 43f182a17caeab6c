#include "textmill/code_prep.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "textmill/errors.hpp"
#include "textmill/parallel.hpp"
#include "textmill/unicode.hpp"

namespace textmill::code {

void CodeFilterConfig::validate() const {
  if (min_chars > max_chars) throw ConfigError("code filter: min_chars exceeds max_chars");
  if (maxline_min > maxline_max) throw ConfigError("code filter: maxline_min exceeds maxline_max");
  if (!(alpha_min >= 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0))
    throw ConfigError("code filter: alphabetic fractions must satisfy 0 <= alpha_min <= alpha_max <= 1");
  if (!(tokstd_min >= 0.0)) throw ConfigError("code filter: tokstd_min must be >= 0");
  if (!(literal_frac >= 0.0 && literal_frac < 1.0)) throw ConfigError("code filter: literal_frac must be in [0,1)");
}

CodeFilterConfig CodeFilterConfig::from_json(const nlohmann::json& j) {
  CodeFilterConfig c;
  if (!j.is_object()) throw ConfigError("code filter config must be an object");
  try {
    c.min_chars = j.value("min_chars", c.min_chars);
    c.max_chars = j.value("max_chars", c.max_chars);
    c.alpha_min = j.value("alpha_min", c.alpha_min);
    c.alpha_max = j.value("alpha_max", c.alpha_max);
    c.maxline_min = j.value("maxline_min", c.maxline_min);
    c.maxline_max = j.value("maxline_max", c.maxline_max);
    c.tokstd_min = j.value("tokstd_min", c.tokstd_min);
    c.keywords = j.value("keywords", c.keywords);
    c.literal_frac = j.value("literal_frac", c.literal_frac);
    c.header_lines = j.value("header_lines", c.header_lines);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("code filter config: ") + e.what());
  }
  c.validate();
  return c;
}

CodeStats code_stats(std::string_view src) {
  CodeStats s;
  std::size_t letters = 0;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < src.size()) {
    const char32_t cp = unicode::next_code_point(src, pos);
    ++s.chars;
    if (unicode::is_letter(cp)) ++letters;
    if (cp == U'\n') {
      s.max_line = std::max(s.max_line, line);
      line = 0;
    } else {
      ++line;
    }
  }
  s.max_line = std::max(s.max_line, line);
  if (s.chars > 0) s.alpha_fraction = static_cast<double>(letters) / static_cast<double>(s.chars);

  // Population variance from exact integer sums.
  const auto tokens = unicode::split_whitespace(src);
  if (!tokens.empty()) {
    unsigned long long n = tokens.size();
    unsigned long long sum = 0;
    unsigned long long sum_sq = 0;
    for (auto t : tokens) {
      const unsigned long long len = unicode::length(t);
      sum += len;
      sum_sq += len * len;
    }
    const long double num = static_cast<long double>(n) * static_cast<long double>(sum_sq) -
                            static_cast<long double>(sum) * static_cast<long double>(sum);
    const double var = static_cast<double>(num / (static_cast<long double>(n) * static_cast<long double>(n)));
    s.token_stddev = std::sqrt(std::max(0.0, var));
  }
  return s;
}

CodeVerdict code_file_filter(std::string_view src, const CodeFilterConfig& config) {
  CodeVerdict v;
  v.stats = code_stats(src);
  const auto& s = v.stats;
  if (s.chars < config.min_chars) v.failed.emplace_back("min_chars");
  if (s.chars > config.max_chars) v.failed.emplace_back("max_chars");
  if (s.alpha_fraction < config.alpha_min) v.failed.emplace_back("alpha_min");
  if (s.alpha_fraction > config.alpha_max) v.failed.emplace_back("alpha_max");
  if (s.max_line < config.maxline_min) v.failed.emplace_back("maxline_min");
  if (s.max_line > config.maxline_max) v.failed.emplace_back("maxline_max");
  if (!(s.token_stddev > config.tokstd_min)) v.failed.emplace_back("tokstd");
  v.kept = v.failed.empty();
  return v;
}

std::string_view to_string(CodeClass c) noexcept {
  switch (c) {
    case CodeClass::config: return "config";
    case CodeClass::test: return "test";
    case CodeClass::code: return "code";
  }
  return "code";
}

CodeClass classify_config_test(std::string_view src, const CodeFilterConfig& config) {
  if (src.empty()) return CodeClass::code;
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start < src.size()) {
      std::size_t nl = src.find('\n', start);
      if (nl == std::string_view::npos) nl = src.size();
      lines.push_back(unicode::to_lower(src.substr(start, nl - start)));
      start = nl + 1;
    }
  }
  const std::size_t header = std::min(config.header_lines, lines.size());
  for (std::size_t i = 0; i < header; ++i) {
    for (const auto& kw : config.keywords) {
      if (lines[i].find(unicode::to_lower(kw)) == std::string::npos) continue;
      return unicode::to_lower(kw).find("test") != std::string::npos ? CodeClass::test : CodeClass::config;
    }
  }
  const auto share = [&](std::string_view literal) {
    std::size_t hits = 0;
    for (const auto& l : lines) hits += l.find(literal) != std::string::npos;
    return static_cast<double>(hits) / static_cast<double>(lines.size());
  };
  if (share("config") > config.literal_frac) return CodeClass::config;
  if (share("test") > config.literal_frac) return CodeClass::test;
  return CodeClass::code;
}

Dataset exact_dedup(const Dataset& files, std::vector<std::string>* removed_ids) {
  std::unordered_set<std::string_view> seen;
  Dataset out;
  for (const auto& f : files) {
    if (seen.insert(f.text).second) {
      out.push_back(f);
    } else if (removed_ids) {
      removed_ids->push_back(f.id);
    }
  }
  return out;
}

Dataset read_code_dir(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw IoError("not a directory: " + root);
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) paths.push_back(entry.path());
  }
  std::vector<std::pair<std::string, fs::path>> rel;
  for (const auto& p : paths) rel.emplace_back(fs::relative(p, root).generic_string(), p);
  std::sort(rel.begin(), rel.end());
  Dataset out;
  for (const auto& [name, p] : rel) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string bytes = buf.str();
    if (bytes.find('\0') != std::string::npos) continue;
    Document d;
    d.id = name;
    d.text = unicode::sanitize_utf8(bytes);
    d.meta["path"] = name;
    out.push_back(std::move(d));
  }
  return out;
}

CodePrepResult prepare_code(const Dataset& files, const CodePrepOptions& options) {
  options.filter.validate();
  CodePrepResult result;
  result.records.resize(files.size());

  std::unordered_set<std::string_view> seen;
  std::vector<std::size_t> unique;
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto path = files[i].meta_string("path");
    result.records[i].path = path ? *path : files[i].id;
    if (seen.insert(files[i].text).second) {
      unique.push_back(i);
    } else {
      result.records[i].duplicate = true;
      result.records[i].failed.emplace_back("exact_duplicate");
      ++result.exact_duplicates;
    }
  }

  std::vector<CodeVerdict> verdicts(unique.size());
  std::vector<CodeClass> classes(unique.size());
  parallel_for(unique.size(), options.threads, [&](std::size_t k) {
    const auto& text = files[unique[k]].text;
    verdicts[k] = code_file_filter(text, options.filter);
    classes[k] = classify_config_test(text, options.filter);
  });

  std::vector<std::size_t> survivors;
  for (std::size_t k = 0; k < unique.size(); ++k) {
    auto& rec = result.records[unique[k]];
    rec.cls = classes[k];
    rec.failed.insert(rec.failed.end(), verdicts[k].failed.begin(), verdicts[k].failed.end());
    if (!verdicts[k].kept) {
      ++result.filtered;
      continue;
    }
    if (classes[k] == CodeClass::config) ++result.config_files;
    if (classes[k] == CodeClass::test) ++result.test_files;
    if (options.drop_config_test && classes[k] != CodeClass::code) continue;
    survivors.push_back(unique[k]);
  }

  Dataset candidates;
  candidates.reserve(survivors.size());
  for (auto i : survivors) candidates.push_back(files[i]);
  std::vector<bool> drop(candidates.size(), false);
  if (options.near_dedup && !candidates.empty()) {
    const auto near = dedup::minhash_dedup(candidates, options.dedup, options.threads);
    for (auto r : near.removed) {
      drop[r] = true;
      result.records[survivors[r]].duplicate = true;
      result.records[survivors[r]].failed.emplace_back("near_duplicate");
      ++result.near_duplicates;
    }
  }
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (drop[k]) continue;
    Document d = std::move(candidates[k]);
    d.meta["code_class"] = std::string(to_string(result.records[survivors[k]].cls));
    result.kept.push_back(std::move(d));
  }
  return result;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_code_report(std::ostream& out, const std::vector<CodeRecord>& records) {
  out << "path,class,failed\n";
  for (const auto& r : records) {
    std::string failed;
    for (std::size_t i = 0; i < r.failed.size(); ++i) {
      if (i) failed.push_back(';');
      failed += r.failed[i];
    }
    out << csv_escape(r.path) << ',' << to_string(r.cls) << ',' << csv_escape(failed) << '\n';
  }
}

}  // namespace textmill::code
