#pragma once

// Fifty synthetic source files sitting on the code-filter and config/test
// classification boundaries, with their expected outcomes, plus an
// independent ASCII oracle for the same rules.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace textmill::testing {

struct CodeFixture {
  std::string name;
  std::string text;
  std::vector<std::string> failed;  // expected failed filter rules, in rule order
  std::string cls;                  // expected class: code, config or test
};

struct OracleStats {
  std::size_t chars = 0;
  double alpha = 0.0;
  std::size_t max_line = 0;
  double stddev = 0.0;
};

/// ASCII-only reference statistics.
inline OracleStats oracle_stats(const std::string& s) {
  OracleStats o;
  o.chars = s.size();
  std::size_t letters = 0, line = 0;
  for (char c : s) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) ++letters;
    if (c == '\n') {
      o.max_line = std::max(o.max_line, line);
      line = 0;
    } else {
      ++line;
    }
  }
  o.max_line = std::max(o.max_line, line);
  o.alpha = s.empty() ? 0.0 : static_cast<double>(letters) / static_cast<double>(s.size());
  std::vector<double> lens;
  std::size_t cur = 0;
  for (char c : s + " ") {
    if (c == ' ' || c == '\n' || c == '\t') {
      if (cur) lens.push_back(static_cast<double>(cur));
      cur = 0;
    } else {
      ++cur;
    }
  }
  if (!lens.empty()) {
    double mean = 0;
    for (double l : lens) mean += l;
    mean /= static_cast<double>(lens.size());
    double var = 0;
    for (double l : lens) var += (l - mean) * (l - mean);
    o.stddev = std::sqrt(var / static_cast<double>(lens.size()));
  }
  return o;
}

/// Reference verdict under the default thresholds.
inline std::vector<std::string> oracle_failed(const std::string& s) {
  const OracleStats o = oracle_stats(s);
  std::vector<std::string> f;
  if (o.chars < 100) f.push_back("min_chars");
  if (o.chars > 200000) f.push_back("max_chars");
  if (o.alpha < 0.15) f.push_back("alpha_min");
  if (o.alpha > 0.65) f.push_back("alpha_max");
  if (o.max_line < 20) f.push_back("maxline_min");
  if (o.max_line > 1000) f.push_back("maxline_max");
  if (!(o.stddev > 3.0 + 1e-12)) f.push_back("tokstd");
  return f;
}

inline std::string lower_ascii(std::string s) {
  for (auto& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

/// Reference classification with the default keywords, 5 header lines and 5%.
inline std::string oracle_class(const std::string& s) {
  if (s.empty()) return "code";
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string::npos) nl = s.size();
    lines.push_back(lower_ascii(s.substr(start, nl - start)));
    start = nl + 1;
  }
  for (std::size_t i = 0; i < lines.size() && i < 5; ++i) {
    if (lines[i].find("configuration file") != std::string::npos) return "config";
    if (lines[i].find("test file") != std::string::npos) return "test";
  }
  std::size_t cfg = 0, tst = 0;
  for (const auto& l : lines) {
    cfg += l.find("config") != std::string::npos;
    tst += l.find("test") != std::string::npos;
  }
  // Integer form of hits / lines > 0.05.
  if (cfg * 20 > lines.size()) return "config";
  if (tst * 20 > lines.size()) return "test";
  return "code";
}

/// Text of exactly `chars` characters with `letters` letters and a longest
/// line of exactly min(max_line, chars). Tokens alternate between 10 and 1
/// characters, which keeps the token-length deviation well above 3.
inline std::string shaped_text(std::size_t chars, std::size_t letters, std::size_t max_line) {
  std::vector<std::string> lines;
  std::size_t remaining = chars;
  bool first = true;
  while (remaining > 0) {
    std::size_t n = std::min(max_line, remaining);
    if (!first && remaining - n == 1) --n;  // avoid a trailing empty line
    std::string line;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = i % 13;
      line += (k == 10 || k == 12) ? ' ' : 'x';
    }
    if (line.back() == ' ') line.back() = 'x';
    lines.push_back(line);
    remaining -= n;
    if (remaining > 0) --remaining;  // newline
    first = false;
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  std::size_t assigned = 0;
  for (auto& c : out) {
    if (c != 'x') continue;
    c = assigned < letters ? static_cast<char>('a' + assigned % 26) : static_cast<char>('0' + assigned % 10);
    ++assigned;
  }
  if (assigned < letters) throw std::logic_error("shaped_text: not enough non-space characters");
  return out;
}

/// Three lines of token pairs with the given lengths, letters first.
inline std::string token_pairs(std::size_t short_len, std::size_t long_len, std::size_t pairs_per_line) {
  auto token = [](std::size_t len) {
    std::string t;
    for (std::size_t i = 0; i < len; ++i) t += i < (len + 1) / 2 ? static_cast<char>('a' + i) : '9';
    return t;
  };
  std::string out;
  for (int l = 0; l < 3; ++l) {
    if (l) out += '\n';
    for (std::size_t p = 0; p < pairs_per_line; ++p) {
      if (p) out += ' ';
      out += token(long_len) + " " + token(short_len);
    }
  }
  return out;
}

inline std::string code_lines(std::size_t n, std::size_t config_lines, std::size_t test_lines,
                              std::size_t first_literal_line = 5) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += '\n';
    const bool cfg = i >= first_literal_line && i < first_literal_line + config_lines;
    const bool tst = i >= first_literal_line + config_lines && i < first_literal_line + config_lines + test_lines;
    if (cfg)
      out += "    value_" + std::to_string(i) + " = load_config(path, 12)";
    else if (tst)
      out += "    value_" + std::to_string(i) + " = run_test(case, 12)";
    else
      out += "    value_" + std::to_string(i) + " = compute(alpha, beta, 1234567)";
  }
  return out;
}

inline std::vector<CodeFixture> code_fixtures() {
  std::vector<CodeFixture> v;
  using F = std::vector<std::string>;
  // Character count bounds (letters 40% of the text, lines of 40).
  v.push_back({"chars_099.py", shaped_text(99, 40, 40), {"min_chars"}, "code"});
  v.push_back({"chars_100.py", shaped_text(100, 40, 40), {}, "code"});
  v.push_back({"chars_101.py", shaped_text(101, 40, 40), {}, "code"});
  v.push_back({"chars_050.py", shaped_text(50, 20, 40), {"min_chars"}, "code"});
  v.push_back({"chars_199999.py", shaped_text(199999, 80000, 200), {}, "code"});
  v.push_back({"chars_200000.py", shaped_text(200000, 80000, 200), {}, "code"});
  v.push_back({"chars_200001.py", shaped_text(200001, 80000, 200), {"max_chars"}, "code"});
  // Alphabetic fraction on 100-character files.
  v.push_back({"alpha_014.py", shaped_text(100, 14, 40), {"alpha_min"}, "code"});
  v.push_back({"alpha_015.py", shaped_text(100, 15, 40), {}, "code"});
  v.push_back({"alpha_016.py", shaped_text(100, 16, 40), {}, "code"});
  v.push_back({"alpha_064.py", shaped_text(100, 64, 40), {}, "code"});
  v.push_back({"alpha_065.py", shaped_text(100, 65, 40), {}, "code"});
  v.push_back({"alpha_066.py", shaped_text(100, 66, 40), {"alpha_max"}, "code"});
  v.push_back({"alpha_000.py", shaped_text(200, 0, 40), {"alpha_min"}, "code"});
  // Longest line.
  v.push_back({"line_019.py", shaped_text(300, 120, 19), {"maxline_min"}, "code"});
  v.push_back({"line_020.py", shaped_text(300, 120, 20), {}, "code"});
  v.push_back({"line_021.py", shaped_text(300, 120, 21), {}, "code"});
  v.push_back({"line_999.py", shaped_text(3000, 1200, 999), {}, "code"});
  v.push_back({"line_1000.py", shaped_text(3000, 1200, 1000), {}, "code"});
  v.push_back({"line_1001.py", shaped_text(3000, 1200, 1001), {"maxline_max"}, "code"});
  // Token-length deviation: pairs (1,7) give exactly 3, (1,8) 3.5, (2,7) 2.5.
  v.push_back({"tokstd_exact3.py", token_pairs(1, 7, 4), {"tokstd"}, "code"});
  v.push_back({"tokstd_above.py", token_pairs(1, 8, 4), {}, "code"});
  v.push_back({"tokstd_below.py", token_pairs(2, 7, 4), {"tokstd"}, "code"});
  v.push_back({"tokstd_zero.py", token_pairs(2, 2, 8), {"tokstd"}, "code"});
  // Several rules at once.
  v.push_back({"multi_short_flat.py", "aa bb cc", {"min_chars", "alpha_max", "maxline_min", "tokstd"}, "code"});
  v.push_back({"multi_digits.py", std::string(150, '1'), {"alpha_min", "tokstd"}, "code"});
  v.push_back({"empty.py", "", {"min_chars", "alpha_min", "maxline_min", "tokstd"}, "code"});

  // Classification step 1: keywords in the first five lines.
  const std::string body = code_lines(12, 0, 0);
  v.push_back({"kw_config_line1.cfg", "# configuration file for build\n" + body, F{}, "config"});
  v.push_back({"kw_test_line5.py", code_lines(4, 0, 0) + "\n# Test File helpers\n" + body, F{}, "test"});
  v.push_back({"kw_line6_only.py", code_lines(5, 0, 0) + "\n# configuration file\n" + code_lines(20, 0, 0), F{},
               "code"});
  v.push_back({"kw_upper.cfg", "# CONFIGURATION FILE\n" + body, F{}, "config"});
  v.push_back({"kw_both_first_wins.py", "# test file and configuration file\n" + body, F{}, "config"});
  // Step 2: share of lines holding the literal, strictly above 5%.
  v.push_back({"lit_test_10pct.py", code_lines(10, 0, 1), F{}, "test"});
  v.push_back({"lit_config_5of100.py", code_lines(100, 5, 0), F{}, "code"});
  v.push_back({"lit_config_6of100.py", code_lines(100, 6, 0), F{}, "config"});
  v.push_back({"lit_test_1of20.py", code_lines(20, 0, 1), F{}, "code"});
  v.push_back({"lit_test_1of19.py", code_lines(19, 0, 1), F{}, "test"});
  v.push_back({"lit_config_over_test.py", code_lines(20, 2, 2), F{}, "config"});
  v.push_back({"lit_test_only.py", code_lines(20, 1, 2), F{}, "test"});
  v.push_back({"lit_blank_padding.py", code_lines(10, 0, 1) + std::string(10, '\n') + "    end = 1", F{}, "code"});
  v.push_back({"lit_upper_config.py", "# CONFIG\n" + code_lines(10, 0, 0), F{}, "config"});
  v.push_back({"lit_none.py", code_lines(30, 0, 0), F{}, "code"});

  // Ordinary files and exact duplicates.
  for (int i = 0; i < 6; ++i)
    v.push_back({"plain_" + std::to_string(i) + ".py", code_lines(8 + i * 3, 0, 0), F{}, "code"});
  v.push_back({"dup_a.py", code_lines(9, 0, 0) + "\n# dup", F{}, "code"});
  v.push_back({"dup_b.py", code_lines(9, 0, 0) + "\n# dup", F{}, "code"});

  // Classification files: their filter outcome comes from the oracle.
  for (auto& f : v)
    if (f.name.rfind("kw_", 0) == 0 || f.name.rfind("lit_", 0) == 0 || f.name.rfind("plain_", 0) == 0 ||
        f.name.rfind("dup_", 0) == 0)
      f.failed = oracle_failed(f.text);
  return v;
}

}  // namespace textmill::testing
