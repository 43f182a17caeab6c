#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmill/dedup.hpp"
#include "textmill/document.hpp"

namespace textmill::code {

struct CodeFilterConfig {
  std::size_t min_chars = 100;
  std::size_t max_chars = 200000;
  double alpha_min = 0.15;
  double alpha_max = 0.65;
  std::size_t maxline_min = 20;
  std::size_t maxline_max = 1000;
  double tokstd_min = 3.0;
  std::vector<std::string> keywords = {"configuration file", "test file"};
  double literal_frac = 0.05;
  std::size_t header_lines = 5;

  void validate() const;
  static CodeFilterConfig from_json(const nlohmann::json& j);
};

struct CodeStats {
  std::size_t chars = 0;
  double alpha_fraction = 0.0;
  std::size_t max_line = 0;
  double token_stddev = 0.0;  // population
};

CodeStats code_stats(std::string_view src);

struct CodeVerdict {
  bool kept = true;
  std::vector<std::string> failed;  // min_chars, max_chars, alpha_min, alpha_max, maxline_min, maxline_max, tokstd
  CodeStats stats;
};

/// Bounds are inclusive except the token-length deviation, which must exceed
/// tokstd_min.
CodeVerdict code_file_filter(std::string_view src, const CodeFilterConfig& config = {});

enum class CodeClass { config, test, code };
std::string_view to_string(CodeClass c) noexcept;

/// Step 1: a keyword in one of the first header_lines lines. Step 2: the share
/// of lines containing "config" (then "test"), case-insensitive, strictly
/// above literal_frac.
CodeClass classify_config_test(std::string_view src, const CodeFilterConfig& config = {});

/// Keeps the first of byte-identical texts.
Dataset exact_dedup(const Dataset& files, std::vector<std::string>* removed_ids = nullptr);

/// Reads every regular file under `root` (sorted by relative path). Files
/// containing NUL bytes are skipped. Id and meta.path are the relative path.
Dataset read_code_dir(const std::string& root);

struct CodeRecord {
  std::string path;
  CodeClass cls = CodeClass::code;
  std::vector<std::string> failed;
  bool duplicate = false;  // exact or near duplicate
};

struct CodePrepOptions {
  CodeFilterConfig filter;
  bool drop_config_test = true;
  bool near_dedup = true;
  dedup::DedupConfig dedup;
  std::size_t threads = 1;
};

struct CodePrepResult {
  Dataset kept;
  std::vector<CodeRecord> records;  // one per input file, input order
  std::size_t exact_duplicates = 0;
  std::size_t filtered = 0;
  std::size_t config_files = 0;
  std::size_t test_files = 0;
  std::size_t near_duplicates = 0;
};

/// Exact dedup, file filter, config/test classification, then MinHash near
/// dedup. Kept documents carry meta "code_class".
CodePrepResult prepare_code(const Dataset& files, const CodePrepOptions& options);

/// CSV with header "path,class,failed"; failed rules joined by ';'.
void write_code_report(std::ostream& out, const std::vector<CodeRecord>& records);

std::string csv_escape(std::string_view field);

}  // namespace textmill::code
