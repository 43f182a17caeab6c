#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "textmill/analysis.hpp"
#include "textmill/clean.hpp"
#include "textmill/code_prep.hpp"
#include "textmill/dedup.hpp"
#include "textmill/document.hpp"
#include "textmill/html.hpp"
#include "textmill/parallel.hpp"
#include "textmill/pii.hpp"
#include "textmill/pipeline.hpp"
#include "textmill/quality.hpp"
#include "textmill/range_fetch.hpp"
#include "textmill/tune_service.hpp"
#include "textmill/warc.hpp"

namespace textmill::cli {
namespace {

namespace fs = std::filesystem;

constexpr std::size_t kBatch = 4096;

/// Bad invocation: missing files, conflicting flags.
class UsageError : public Error {
 public:
  using Error::Error;
};

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}
  void info(const std::string& m) { err_ << "INFO: " << m << '\n'; }
  void warn(const std::string& m) { err_ << "WARN: " << m << '\n'; }
  void error(const std::string& m) { err_ << "ERROR: " << m << '\n'; }

 private:
  std::ostream& err_;
};

struct Input {
  std::unique_ptr<std::ifstream> file;
  std::istream* stream = nullptr;
  std::string name;
};

Input open_input(const std::string& path, bool binary = false) {
  Input in;
  if (path == "-") {
    in.stream = &std::cin;
    in.name = "stdin";
    return in;
  }
  if (!fs::is_regular_file(path)) throw UsageError("input file not found: " + path);
  in.file = std::make_unique<std::ifstream>(path, binary ? std::ios::binary : std::ios::in);
  if (!*in.file) throw UsageError("cannot open input " + path);
  in.stream = in.file.get();
  in.name = source_name_for(path);
  return in;
}

struct Output {
  std::unique_ptr<std::ofstream> file;
  std::ostream* stream = nullptr;
};

Output open_output(const std::string& path) {
  Output out;
  if (path == "-") {
    out.stream = &std::cout;
    return out;
  }
  out.file = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*out.file) throw UsageError("cannot open output " + path);
  out.stream = out.file.get();
  return out;
}

void finish_output(Output& out, const std::string& path) {
  out.stream->flush();
  if (!*out.stream) throw IoError("write failed: " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_output(path);
  *out.stream << j.dump(2) << '\n';
  finish_output(out, path);
}

nlohmann::json read_json(const std::string& path) {
  auto in = open_input(path);
  try {
    return nlohmann::json::parse(*in.stream);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Options shared by the document-processing subcommands.
struct Common {
  std::string input = "-";
  std::string output = "-";
  std::string report;
  std::string lang;
  std::size_t threads = 0;
  bool skip_malformed = false;
};

void add_common(CLI::App* sub, Common& c, bool with_output = true) {
  sub->add_option("-i,--input", c.input, "Input JSONL (- for stdin)");
  if (with_output) sub->add_option("-o,--output", c.output, "Output JSONL (- for stdout)");
  sub->add_option("--report", c.report, "Write a JSON report here");
  sub->add_option("--lang", c.lang, "Language code assigned to every document");
  sub->add_option("--threads", c.threads, "Worker threads (0: one per core)");
  sub->add_flag("--skip-malformed", c.skip_malformed, "Skip malformed JSONL lines instead of failing");
}

ErrorMode mode_of(const Common& c) { return c.skip_malformed ? ErrorMode::skip_and_count : ErrorMode::fail_fast; }

void apply_lang(Document& d, const std::string& lang) {
  if (!lang.empty()) d.meta[kMetaLanguage] = LanguageTag(lang).code();
}

Dataset read_all(const Common& c, Log& log) {
  auto in = open_input(c.input);
  JsonlReader reader(*in.stream, in.name, mode_of(c));
  Dataset docs;
  while (auto d = reader.next()) {
    apply_lang(*d, c.lang);
    docs.push_back(std::move(*d));
  }
  if (reader.malformed_count()) log.warn("skipped " + std::to_string(reader.malformed_count()) + " malformed lines");
  return docs;
}

std::size_t write_all(const Dataset& docs, const std::string& path) {
  auto out = open_output(path);
  JsonlWriter writer(*out.stream);
  for (const auto& d : docs) writer.write(d);
  finish_output(out, path);
  return writer.written();
}

/// Reads the input in fixed-size batches, hands each batch to `fn` and
/// writes what it returns. Batch boundaries do not depend on the thread count.
template <typename Fn>
std::size_t stream_batches(const Common& c, Log& log, Fn&& fn) {
  auto in = open_input(c.input);
  auto out = open_output(c.output);
  JsonlReader reader(*in.stream, in.name, mode_of(c));
  JsonlWriter writer(*out.stream);
  Dataset batch;
  auto flush = [&] {
    if (batch.empty()) return;
    for (const auto& d : fn(batch)) writer.write(d);
    batch.clear();
  };
  while (auto d = reader.next()) {
    apply_lang(*d, c.lang);
    batch.push_back(std::move(*d));
    if (batch.size() == kBatch) flush();
  }
  flush();
  finish_output(out, c.output);
  if (reader.malformed_count()) log.warn("skipped " + std::to_string(reader.malformed_count()) + " malformed lines");
  return writer.written();
}

std::size_t bytes_of(std::span<const Document> docs) {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.byte_len();
  return n;
}

void count_in(StepReport& r, std::span<const Document> docs) {
  r.docs_in += docs.size();
  r.bytes_in += bytes_of(docs);
  for (const auto& d : docs) {
    auto& t = r.per_language[quality::FilterConfigSet::language_of(d)];
    ++t.docs_in;
    t.bytes_in += d.byte_len();
  }
}

void count_out(StepReport& r, std::span<const Document> docs) {
  r.docs_out += docs.size();
  r.bytes_out += bytes_of(docs);
  for (const auto& d : docs) {
    auto& t = r.per_language[quality::FilterConfigSet::language_of(d)];
    ++t.docs_out;
    t.bytes_out += d.byte_len();
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

void merge_details(nlohmann::json& into, const nlohmann::json& from) {
  for (const auto& [key, v] : from.items()) {
    if (!into.contains(key)) {
      into[key] = v;
    } else if (v.is_number_unsigned() && into[key].is_number_unsigned()) {
      into[key] = into[key].get<std::size_t>() + v.get<std::size_t>();
    } else if (v.is_array() && into[key].is_array()) {
      for (const auto& item : v) into[key].push_back(item);
    }
  }
}

void merge_reports(std::vector<StepReport>& total, const std::vector<StepReport>& batch) {
  if (total.empty()) {
    total = batch;
    return;
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto& t = total[i];
    const auto& b = batch[i];
    t.docs_in += b.docs_in;
    t.docs_out += b.docs_out;
    t.bytes_in += b.bytes_in;
    t.bytes_out += b.bytes_out;
    t.docs_modified += b.docs_modified;
    t.wall_time_ms += b.wall_time_ms;
    for (const auto& [lang, tally] : b.per_language) {
      auto& x = t.per_language[lang];
      x.docs_in += tally.docs_in;
      x.docs_out += tally.docs_out;
      x.bytes_in += tally.bytes_in;
      x.bytes_out += tally.bytes_out;
    }
    merge_details(t.details, b.details);
  }
}

nlohmann::json step_summary(const std::vector<StepReport>& reports) {
  nlohmann::json j;
  j["steps"] = reports_to_json(reports);
  j["removal_report"] = analysis::to_json(analysis::removal_report(reports));
  return j;
}

// ---- run / clean -------------------------------------------------------------

struct RunArgs {
  Common common;
  std::string config;
  std::vector<std::string> steps;
  std::string pii_log;
  std::string removal_csv;
};

int do_run(const RunArgs& a, Log& log, bool from_steps) {
  Pipeline pipeline;
  if (from_steps) {
    if (!a.config.empty()) throw UsageError("use either --config or --steps");
    nlohmann::json j = {{"steps", nlohmann::json::array()}};
    for (const auto& name : a.steps) j["steps"].push_back({{"name", name}});
    pipeline = Pipeline::from_json(j);
  } else {
    if (a.config.empty()) throw UsageError("--config is required");
    if (!fs::is_regular_file(a.config)) throw UsageError("config file not found: " + a.config);
    pipeline = Pipeline::load(a.config);
  }

  Output pii_out;
  if (!a.pii_log.empty()) pii_out = open_output(a.pii_log);
  Pipeline::Options opts;
  opts.threads = resolve_threads(a.common.threads);
  if (pii_out.stream) opts.log = [&](const nlohmann::json& rec) { *pii_out.stream << rec.dump() << '\n'; };

  const bool streaming = std::all_of(pipeline.steps().begin(), pipeline.steps().end(),
                                     [](const StepSpec& s) { return s.scope == StepScope::document; });
  std::vector<StepReport> reports;
  std::size_t written = 0;
  if (streaming) {
    written = stream_batches(a.common, log, [&](Dataset& batch) {
      auto res = pipeline.run(std::move(batch), opts);
      merge_reports(reports, res.reports);
      return std::move(res.docs);
    });
    if (reports.empty()) reports = pipeline.run(Dataset{}, opts).reports;
  } else {
    auto res = pipeline.run(read_all(a.common, log), opts);
    reports = std::move(res.reports);
    written = write_all(res.docs, a.common.output);
  }
  if (pii_out.stream) finish_output(pii_out, a.pii_log);
  if (!a.common.report.empty()) write_json(a.common.report, step_summary(reports));
  if (!a.removal_csv.empty()) {
    auto out = open_output(a.removal_csv);
    analysis::write_removal_csv(*out.stream, analysis::removal_report(reports));
    finish_output(out, a.removal_csv);
  }
  log.info("wrote " + std::to_string(written) + " documents");
  return kExitOk;
}

// ---- filter ------------------------------------------------------------------

struct FilterArgs {
  Common common;
  std::string config;
  std::string values;
};

int do_filter(const FilterArgs& a, Log& log) {
  if (a.config.empty()) throw UsageError("--config is required");
  if (!fs::is_regular_file(a.config)) throw UsageError("config file not found: " + a.config);
  const auto set = quality::FilterConfigSet::load(a.config);
  std::map<std::string, quality::Scorers> scorers;
  for (const auto& [lang, cfg] : set.configs()) scorers[lang] = set.scorers_for(cfg);

  Output values_out;
  if (!a.values.empty()) values_out = open_output(a.values);
  const std::size_t threads = resolve_threads(a.common.threads);

  StepReport rep;
  rep.step = "quality_filters";
  rep.scope = "document";
  rep.kind = "filtering";
  std::map<quality::Indicator, std::size_t> per_indicator;
  for (auto ind : quality::kIndicators) per_indicator[ind] = 0;
  const auto start = std::chrono::steady_clock::now();

  const std::size_t written = stream_batches(a.common, log, [&](Dataset& batch) {
    std::vector<quality::FilterValues> values(batch.size());
    std::vector<quality::Verdict> verdicts(batch.size());
    parallel_for(batch.size(), threads, [&](std::size_t i) {
      const auto lang = quality::FilterConfigSet::language_of(batch[i]);
      const quality::FilterConfig* cfg = set.find(lang);
      if (!cfg) throw ConfigError("no filter config for language '" + lang + "' (document " + batch[i].id + ")");
      values[i] = quality::compute_values(batch[i], *cfg, scorers.at(cfg->language));
      verdicts[i] = quality::apply_filters(values[i], *cfg);
    });
    count_in(rep, batch);
    Dataset kept;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      for (auto ind : verdicts[i].failed) ++per_indicator[ind];
      if (values_out.stream) {
        nlohmann::json rec = {{"id", batch[i].id}, {"values", quality::to_json(values[i])}};
        rec.update(quality::to_json(verdicts[i]));
        *values_out.stream << rec.dump() << '\n';
      }
      if (verdicts[i].kept) kept.push_back(std::move(batch[i]));
    }
    count_out(rep, kept);
    return kept;
  });
  rep.wall_time_ms = elapsed_ms(start);
  nlohmann::json per = nlohmann::json::object();
  for (auto ind : quality::kIndicators) per[std::string(quality::to_string(ind))] = per_indicator[ind];
  rep.details["per_indicator_removed"] = per;
  if (values_out.stream) finish_output(values_out, a.values);
  if (!a.common.report.empty()) write_json(a.common.report, step_summary({rep}));
  log.info("kept " + std::to_string(written) + " of " + std::to_string(rep.docs_in) + " documents");
  return kExitOk;
}

// ---- dedup -------------------------------------------------------------------

struct DedupArgs {
  Common common;
  std::string method = "simhash";
  std::string clusters;
  dedup::DedupConfig config;
};

int do_dedup(DedupArgs a, Log& log) {
  a.config.validate();
  const auto start = std::chrono::steady_clock::now();
  Dataset docs = read_all(a.common, log);
  StepReport rep;
  rep.step = "dedup_" + a.method;
  rep.scope = "dataset";
  rep.kind = "filtering";
  count_in(rep, docs);

  const std::size_t threads = resolve_threads(a.common.threads);
  dedup::ClusterResult res;
  const std::map<std::string, clean::KeyKind> exact = {{"exact", clean::KeyKind::text},
                                                       {"url", clean::KeyKind::url},
                                                       {"url-amp", clean::KeyKind::url_amp},
                                                       {"url-keep-id", clean::KeyKind::url_keep_id}};
  if (auto it = exact.find(a.method); it != exact.end()) {
    std::map<std::string, std::size_t> first;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto key = clean::dedup_key(docs[i], it->second);
      if (key.empty()) continue;
      auto [pos, fresh] = first.emplace(key, groups.size());
      if (fresh) groups.emplace_back();
      groups[pos->second].push_back(i);
    }
    for (auto& g : groups) {
      if (g.size() > 1) res.clusters.push_back(std::move(g));
    }
    std::sort(res.clusters.begin(), res.clusters.end());
    res.removed = dedup::keep_first(res.clusters, [](std::size_t) { return false; });
  } else if (a.method == "simhash") {
    res = dedup::find_near_dups(docs, a.config, threads);
  } else if (a.method == "substring") {
    res = dedup::substring_dedup(docs, a.config);
  } else if (a.method == "minhash") {
    res = dedup::minhash_dedup(docs, a.config, threads);
  } else {
    throw UsageError("unknown dedup method " + a.method);
  }

  if (!a.clusters.empty()) {
    auto out = open_output(a.clusters);
    dedup::write_cluster_report(*out.stream, docs, res);
    finish_output(out, a.clusters);
  }
  Dataset kept;
  std::size_t r = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (r < res.removed.size() && res.removed[r] == i) {
      ++r;
      continue;
    }
    kept.push_back(std::move(docs[i]));
  }
  count_out(rep, kept);
  rep.details["clusters"] = res.clusters.size();
  rep.wall_time_ms = elapsed_ms(start);
  write_all(kept, a.common.output);
  if (!a.common.report.empty()) write_json(a.common.report, step_summary({rep}));
  log.info("removed " + std::to_string(res.removed.size()) + " documents in " + std::to_string(res.clusters.size()) +
           " clusters");
  return kExitOk;
}

// ---- pii ---------------------------------------------------------------------

struct PiiArgs {
  Common common;
  std::string pii_log;
};

int do_pii(const PiiArgs& a, Log& log) {
  Output log_out;
  if (!a.pii_log.empty()) log_out = open_output(a.pii_log);
  const std::size_t threads = resolve_threads(a.common.threads);
  StepReport rep;
  rep.step = "pii_redact";
  rep.scope = "document";
  rep.kind = "cleaning";
  std::map<std::string, std::size_t> per_kind;
  for (auto k : {pii::Kind::email, pii::Kind::user, pii::Kind::ip_address, pii::Kind::key})
    per_kind[std::string(pii::tag(k))] = 0;
  const auto start = std::chrono::steady_clock::now();
  stream_batches(a.common, log, [&](Dataset& batch) {
    count_in(rep, batch);
    std::vector<pii::RedactResult> results(batch.size());
    parallel_for(batch.size(), threads, [&](std::size_t i) { results[i] = pii::redact(batch[i].text); });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (results[i].redactions.empty()) continue;
      ++rep.docs_modified;
      for (const auto& red : results[i].redactions) {
        ++per_kind[std::string(pii::tag(red.kind))];
        if (log_out.stream) *log_out.stream << pii::to_json(red, batch[i].id).dump() << '\n';
      }
      batch[i].text = std::move(results[i].text);
    }
    count_out(rep, batch);
    return std::move(batch);
  });
  rep.wall_time_ms = elapsed_ms(start);
  rep.details["redactions"] = per_kind;
  if (log_out.stream) finish_output(log_out, a.pii_log);
  if (!a.common.report.empty()) write_json(a.common.report, step_summary({rep}));
  log.info("redacted " + std::to_string(rep.docs_modified) + " of " + std::to_string(rep.docs_in) + " documents");
  return kExitOk;
}

// ---- code-prep ---------------------------------------------------------------

struct CodeArgs {
  std::string input;
  std::string output = "-";
  std::string report;
  std::string config;
  std::size_t threads = 0;
  bool keep_config_test = false;
  bool no_near_dedup = false;
  double jaccard_min = 0.85;
};

int do_code_prep(const CodeArgs& a, Log& log) {
  if (!fs::is_directory(a.input)) throw UsageError("input directory not found: " + a.input);
  code::CodePrepOptions opts;
  if (!a.config.empty()) opts.filter = code::CodeFilterConfig::from_json(read_json(a.config));
  opts.drop_config_test = !a.keep_config_test;
  opts.near_dedup = !a.no_near_dedup;
  opts.dedup.jaccard_min = a.jaccard_min;
  opts.threads = resolve_threads(a.threads);
  const auto files = code::read_code_dir(a.input);
  const auto res = code::prepare_code(files, opts);
  write_all(res.kept, a.output);
  if (!a.report.empty()) {
    auto out = open_output(a.report);
    code::write_code_report(*out.stream, res.records);
    finish_output(out, a.report);
  }
  log.info("files " + std::to_string(files.size()) + ", exact duplicates " + std::to_string(res.exact_duplicates) +
           ", filtered " + std::to_string(res.filtered) + ", config " + std::to_string(res.config_files) + ", test " +
           std::to_string(res.test_files) + ", near duplicates " + std::to_string(res.near_duplicates) + ", kept " +
           std::to_string(res.kept.size()));
  return kExitOk;
}

// ---- analyze -----------------------------------------------------------------

struct AnalyzeArgs {
  Common common;
  std::string filter_config;
  std::size_t bins = 20;
  std::size_t fertility_min_docs = 5;
  std::string sizes_csv;
  std::string pipeline_report;
  std::string removal_csv;
};

int do_analyze(AnalyzeArgs a, Log& log) {
  if (a.common.report.empty()) a.common.report = "-";
  if (a.bins == 0) throw UsageError("--bins must be positive");
  nlohmann::json stats;
  if (!a.pipeline_report.empty()) {
    const auto j = read_json(a.pipeline_report);
    std::vector<StepReport> reports;
    try {
      for (const auto& s : j.at("steps")) reports.push_back(StepReport::from_json(s));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(a.pipeline_report + ": " + e.what());
    }
    const auto rows = analysis::removal_report(reports);
    stats["removal_report"] = analysis::to_json(rows);
    if (!a.removal_csv.empty()) {
      auto out = open_output(a.removal_csv);
      analysis::write_removal_csv(*out.stream, rows);
      finish_output(out, a.removal_csv);
    }
  }
  if (a.pipeline_report.empty() || a.common.input != "-") {
    const Dataset docs = read_all(a.common, log);
    stats.update(analysis::corpus_summary(docs, a.fertility_min_docs));
    if (!a.sizes_csv.empty()) {
      auto out = open_output(a.sizes_csv);
      analysis::write_size_csv(*out.stream, analysis::size_stats(docs));
      finish_output(out, a.sizes_csv);
    }
    if (!a.filter_config.empty()) {
      if (!fs::is_regular_file(a.filter_config)) throw UsageError("config file not found: " + a.filter_config);
      const auto set = quality::FilterConfigSet::load(a.filter_config);
      std::vector<quality::FilterValues> values(docs.size());
      std::vector<std::string> langs(docs.size());
      parallel_for(docs.size(), resolve_threads(a.common.threads), [&](std::size_t i) {
        langs[i] = quality::FilterConfigSet::language_of(docs[i]);
        const quality::FilterConfig* cfg = set.find(langs[i]);
        const quality::FilterConfig fallback;
        const auto& use = cfg ? *cfg : fallback;
        values[i] = quality::compute_values(docs[i], use, set.scorers_for(use));
      });
      std::map<std::string, std::vector<std::size_t>> by_lang;
      for (std::size_t i = 0; i < docs.size(); ++i) by_lang[langs[i]].push_back(i);
      nlohmann::json hists = nlohmann::json::object();
      for (const auto& [lang, idx] : by_lang) {
        for (auto ind : quality::kIndicators) {
          std::vector<std::optional<double>> v;
          for (auto i : idx) v.push_back(values[i].value(ind));
          hists[lang][std::string(quality::to_string(ind))] = analysis::to_json(analysis::value_histogram(v, a.bins));
        }
      }
      stats["histograms"] = hists;
    }
  }
  write_json(a.common.report, stats);
  return kExitOk;
}

// ---- extract-warc ------------------------------------------------------------

struct WarcArgs {
  std::vector<std::string> inputs;
  std::string triples;
  std::string output = "-";
  std::string report;
  std::string lang;
  std::size_t threads = 0;
  std::size_t max_connections = 4;
  bool no_minify = false;
};

class WarcExtractor {
 public:
  WarcExtractor(const WarcArgs& a, JsonlWriter& writer, Log& log)
      : args_(a), writer_(writer), log_(log), threads_(resolve_threads(a.threads)) {}

  void consume(warc::WarcRecord rec, const std::string& source) {
    ++records_;
    if (auto reason = warc::drop_reason(rec)) {
      ++dropped_[*reason];
      return;
    }
    pending_.push_back({std::move(rec), source});
    if (pending_.size() >= 256) flush();
  }

  void flush() {
    std::vector<std::string> texts(pending_.size());
    parallel_for(pending_.size(), threads_, [&](std::size_t i) {
      const auto& rec = pending_[i].first;
      texts[i] = html::html_to_text(rec.payload(), rec.declared_charset(), !args_.no_minify);
    });
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      const auto& [rec, source] = pending_[i];
      Document d;
      d.id = source + ":" + std::to_string(++seq_[source]);
      d.text = std::move(texts[i]);
      d.meta[kMetaUrl] = rec.target_uri;
      d.meta["source"] = source;
      if (auto id = rec.header("WARC-Record-ID")) d.meta["warc_record_id"] = *id;
      if (auto date = rec.header("WARC-Date")) d.meta["warc_date"] = *date;
      d.meta["warc_offset"] = rec.offset;
      d.meta["warc_length"] = rec.length;
      if (!rec.content_type.empty()) d.meta["content_type"] = rec.content_type;
      apply_lang(d, args_.lang);
      writer_.write(d);
      ++kept_;
    }
    pending_.clear();
  }

  void record_errors(const std::vector<warc::RecordError>& errors, const std::string& source) {
    for (const auto& e : errors) {
      log_.warn(source + " offset " + std::to_string(e.offset) + ": " + e.message);
      errors_.push_back({{"source", source}, {"offset", e.offset}, {"message", e.message}});
    }
  }

  void fetch_failed(const std::string& what) {
    ++dropped_["fetch-error"];
    log_.warn(what);
  }

  nlohmann::json report() const {
    return {{"records", records_}, {"kept", kept_}, {"dropped", dropped_}, {"record_errors", errors_}};
  }
  std::size_t kept() const noexcept { return kept_; }

 private:
  const WarcArgs& args_;
  JsonlWriter& writer_;
  Log& log_;
  std::size_t threads_;
  std::vector<std::pair<warc::WarcRecord, std::string>> pending_;
  std::map<std::string, std::size_t> seq_;
  std::map<std::string, std::size_t> dropped_;
  nlohmann::json errors_ = nlohmann::json::array();
  std::size_t records_ = 0;
  std::size_t kept_ = 0;
};

int do_extract_warc(const WarcArgs& a, Log& log) {
  if (a.inputs.empty() && a.triples.empty()) throw UsageError("give --input WARC files or --triples");
  for (const auto& p : a.inputs) {
    if (!fs::is_regular_file(p)) throw UsageError("input file not found: " + p);
  }
  std::vector<warc::RangeTriple> triples;
  if (!a.triples.empty()) {
    auto in = open_input(a.triples);
    triples = warc::read_triples(*in.stream);
  }
  auto out = open_output(a.output);
  JsonlWriter writer(*out.stream);
  WarcExtractor ex(a, writer, log);
  for (const auto& p : a.inputs) {
    auto in = open_input(p, true);
    warc::WarcReader reader(*in.stream);
    while (auto rec = reader.next()) ex.consume(std::move(*rec), in.name);
    ex.record_errors(reader.errors(), in.name);
  }
  if (!triples.empty()) {
    const auto source = source_name_for(a.triples);
    const auto outcomes = warc::fetch_all([] { return std::make_unique<warc::HttpRangeClient>(); }, triples,
                                          std::max<std::size_t>(1, a.max_connections));
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (!outcomes[i].bytes) {
        ex.fetch_failed(triples[i].url + " @" + std::to_string(triples[i].offset) + ": " + outcomes[i].error);
        continue;
      }
      std::istringstream in(*outcomes[i].bytes);
      std::vector<warc::RecordError> errors;
      for (auto& rec : warc::parse_warc(in, &errors)) ex.consume(std::move(rec), source);
      ex.record_errors(errors, source);
    }
  }
  ex.flush();
  finish_output(out, a.output);
  if (!a.report.empty()) write_json(a.report, ex.report());
  log.info("extracted " + std::to_string(ex.kept()) + " documents");
  return kExitOk;
}

// ---- serve -------------------------------------------------------------------

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string config;
  std::string pipelines = ".";
  std::string sample;
  std::string cors_origin = "*";
  std::size_t max_docs = 50000;
  std::size_t threads = 0;
};

int do_serve(const ServeArgs& a, Log& log) {
  service::ServiceOptions opts;
  opts.max_docs = a.max_docs;
  opts.threads = resolve_threads(a.threads);
  opts.pipeline_dir = a.pipelines;
  opts.cors_origin = a.cors_origin;
  if (!a.config.empty()) {
    if (!fs::is_regular_file(a.config)) throw UsageError("config file not found: " + a.config);
    opts.filters = std::make_shared<const quality::FilterConfigSet>(quality::FilterConfigSet::load(a.config));
  }
  service::TuneService svc(opts);
  if (!a.sample.empty()) {
    auto in = open_input(a.sample);
    std::ostringstream body;
    body << in.stream->rdbuf();
    service::Request req{"POST", "/api/datasets", {}, body.str()};
    const auto res = svc.handle(req);
    if (res.status != 200) throw UsageError("sample rejected: " + res.body);
    log.info("loaded sample " + res.body);
  }
  log.info("listening on http://" + a.host + ":" + std::to_string(a.port));
  svc.listen(a.host, a.port);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& err) {
  Log log(err);
  CLI::App app{"textmill: corpus curation toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run a pipeline config");
  add_common(run_cmd, run_args.common);
  run_cmd->add_option("--config", run_args.config, "Pipeline config JSON")->required();
  run_cmd->add_option("--pii-log", run_args.pii_log, "Write PII redaction records (JSONL)");
  run_cmd->add_option("--removal-csv", run_args.removal_csv, "Write the removal report as CSV");

  RunArgs clean_args;
  auto* clean_cmd = app.add_subcommand("clean", "Apply cleaning and filtering functions");
  add_common(clean_cmd, clean_args.common);
  clean_cmd->add_option("--config", clean_args.config, "Pipeline config JSON");
  clean_cmd->add_option("--steps", clean_args.steps, "Step names applied in order (no parameters)")->delimiter(',');
  clean_cmd->add_option("--removal-csv", clean_args.removal_csv, "Write the removal report as CSV");

  FilterArgs filter_args;
  auto* filter_cmd = app.add_subcommand("filter", "Apply quality filters");
  add_common(filter_cmd, filter_args.common);
  filter_cmd->add_option("--config", filter_args.config, "Per-language filter config JSON")->required();
  filter_cmd->add_option("--values", filter_args.values, "Write per-document values and verdicts (JSONL)");

  DedupArgs dedup_args;
  auto* dedup_cmd = app.add_subcommand("dedup", "Remove duplicate documents");
  add_common(dedup_cmd, dedup_args.common);
  dedup_cmd->add_option("--method", dedup_args.method, "exact, url, url-amp, url-keep-id, simhash, substring, minhash")
      ->check(CLI::IsMember({"exact", "url", "url-amp", "url-keep-id", "simhash", "substring", "minhash"}));
  dedup_cmd->add_option("--clusters", dedup_args.clusters, "Write clusters as TSV");
  dedup_cmd->add_option("--hamming-max", dedup_args.config.hamming_max, "SimHash Hamming radius");
  dedup_cmd->add_option("--simhash-n", dedup_args.config.simhash_n, "SimHash character n-gram order");
  dedup_cmd->add_option("--long-doc-chars", dedup_args.config.long_doc_chars, "Length splitting SimHash and suffix-array dedup");
  dedup_cmd->add_option("--min-len", dedup_args.config.substring_min_len, "Minimum shared substring length");
  dedup_cmd->add_option("--jaccard-min", dedup_args.config.jaccard_min, "MinHash verification threshold");
  dedup_cmd->add_option("--seed", dedup_args.config.seed, "MinHash seed");

  PiiArgs pii_args;
  auto* pii_cmd = app.add_subcommand("pii", "Redact personal information");
  add_common(pii_cmd, pii_args.common);
  pii_cmd->add_option("--pii-log", pii_args.pii_log, "Write redaction records (JSONL)");

  CodeArgs code_args;
  auto* code_cmd = app.add_subcommand("code-prep", "Filter, classify and deduplicate source files");
  code_cmd->add_option("-i,--input", code_args.input, "Directory of source files")->required();
  code_cmd->add_option("-o,--output", code_args.output, "Output JSONL (- for stdout)");
  code_cmd->add_option("--report", code_args.report, "Write the per-file CSV report");
  code_cmd->add_option("--config", code_args.config, "Code filter config JSON");
  code_cmd->add_option("--threads", code_args.threads, "Worker threads (0: one per core)");
  code_cmd->add_flag("--keep-config-test", code_args.keep_config_test, "Keep configuration and test files");
  code_cmd->add_flag("--no-near-dedup", code_args.no_near_dedup, "Skip MinHash near-duplicate removal");
  code_cmd->add_option("--jaccard-min", code_args.jaccard_min, "MinHash verification threshold");

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Corpus statistics");
  add_common(analyze_cmd, analyze_args.common, false);
  analyze_cmd->add_option("--filter-config", analyze_args.filter_config, "Filter config for value histograms");
  analyze_cmd->add_option("--bins", analyze_args.bins, "Histogram bins");
  analyze_cmd->add_option("--fertility-min-docs", analyze_args.fertility_min_docs, "Minimum documents per component");
  analyze_cmd->add_option("--sizes-csv", analyze_args.sizes_csv, "Write size statistics as CSV");
  analyze_cmd->add_option("--pipeline-report", analyze_args.pipeline_report, "Report written by run or clean");
  analyze_cmd->add_option("--removal-csv", analyze_args.removal_csv, "Write the removal report as CSV");

  WarcArgs warc_args;
  auto* warc_cmd = app.add_subcommand("extract-warc", "Extract text from HTML records of WARC files");
  warc_cmd->add_option("-i,--input", warc_args.inputs, "WARC files (plain or gzip per record)");
  warc_cmd->add_option("--triples", warc_args.triples, "url<TAB>offset<TAB>length file fetched by HTTP range");
  warc_cmd->add_option("-o,--output", warc_args.output, "Output JSONL (- for stdout)");
  warc_cmd->add_option("--report", warc_args.report, "Write a JSON report here");
  warc_cmd->add_option("--lang", warc_args.lang, "Language code assigned to every document");
  warc_cmd->add_option("--threads", warc_args.threads, "Worker threads (0: one per core)");
  warc_cmd->add_option("--max-connections", warc_args.max_connections, "Concurrent range requests");
  warc_cmd->add_flag("--no-minify", warc_args.no_minify, "Skip DOM minification");

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Start the threshold tuning service");
  serve_cmd->add_option("--host", serve_args.host, "Bind address");
  serve_cmd->add_option("--port", serve_args.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--config", serve_args.config, "Filter config providing word lists and models");
  serve_cmd->add_option("--pipelines", serve_args.pipelines, "Directory of pipeline configs for traces");
  serve_cmd->add_option("--sample", serve_args.sample, "JSONL sample loaded at start");
  serve_cmd->add_option("--cors-origin", serve_args.cors_origin, "Allowed CORS origin");
  serve_cmd->add_option("--max-docs", serve_args.max_docs, "Maximum documents per sample");
  serve_cmd->add_option("--threads", serve_args.threads, "Worker threads (0: one per core)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out;
    std::ostringstream diag;
    const int code = app.exit(e, out, diag);
    if (code == 0) {
      std::cout << out.str();
      return kExitOk;
    }
    std::string msg = diag.str();
    while (!msg.empty() && msg.back() == '\n') msg.pop_back();
    log.error(msg.empty() ? e.what() : msg.substr(0, msg.find('\n')));
    return kExitValidation;
  }

  try {
    if (*run_cmd) return do_run(run_args, log, false);
    if (*clean_cmd) return do_run(clean_args, log, !clean_args.steps.empty());
    if (*filter_cmd) return do_filter(filter_args, log);
    if (*dedup_cmd) return do_dedup(dedup_args, log);
    if (*pii_cmd) return do_pii(pii_args, log);
    if (*code_cmd) return do_code_prep(code_args, log);
    if (*analyze_cmd) return do_analyze(analyze_args, log);
    if (*warc_cmd) return do_extract_warc(warc_args, log);
    if (*serve_cmd) return do_serve(serve_args, log);
  } catch (const UsageError& e) {
    log.error(e.what());
    return kExitValidation;
  } catch (const ConfigError& e) {
    log.error(e.what());
    return kExitValidation;
  } catch (const FormatError& e) {
    log.error(e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    log.error(e.what());
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace textmill::cli
