#include "textmill/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "textmill/code_prep.hpp"
#include "textmill/quality.hpp"

namespace textmill {

nlohmann::json StepReport::to_json(bool include_timing) const {
  nlohmann::json langs = nlohmann::json::object();
  for (const auto& [lang, t] : per_language) {
    langs[lang] = {{"docs_in", t.docs_in}, {"docs_out", t.docs_out}, {"bytes_in", t.bytes_in},
                   {"bytes_out", t.bytes_out}};
  }
  nlohmann::json j = {{"step", step},
                      {"scope", scope},
                      {"kind", kind},
                      {"docs_in", docs_in},
                      {"docs_out", docs_out},
                      {"bytes_in", bytes_in},
                      {"bytes_out", bytes_out},
                      {"docs_modified", docs_modified},
                      {"per_language", langs},
                      {"details", details}};
  if (include_timing) j["wall_time_ms"] = wall_time_ms;
  return j;
}

StepReport StepReport::from_json(const nlohmann::json& j) {
  StepReport r;
  r.step = j.at("step").get<std::string>();
  r.scope = j.value("scope", "");
  r.kind = j.value("kind", "");
  r.docs_in = j.at("docs_in").get<std::size_t>();
  r.docs_out = j.at("docs_out").get<std::size_t>();
  r.bytes_in = j.at("bytes_in").get<std::size_t>();
  r.bytes_out = j.at("bytes_out").get<std::size_t>();
  r.docs_modified = j.value("docs_modified", std::size_t{0});
  r.wall_time_ms = j.value("wall_time_ms", 0.0);
  if (j.contains("per_language")) {
    for (const auto& [lang, t] : j.at("per_language").items()) {
      r.per_language[lang] = {t.at("docs_in").get<std::size_t>(), t.at("docs_out").get<std::size_t>(),
                              t.at("bytes_in").get<std::size_t>(), t.at("bytes_out").get<std::size_t>()};
    }
  }
  r.details = j.value("details", nlohmann::json::object());
  return r;
}

namespace analysis {

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::nan("");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats b;
  b.count = values.size();
  if (values.empty()) return b;
  std::sort(values.begin(), values.end());
  b.q1 = quantile(values, 0.25);
  b.median = quantile(values, 0.5);
  b.q3 = quantile(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      ++b.outlier_count;
      continue;
    }
    b.whisker_low = std::min(b.whisker_low, v);
    b.whisker_high = std::max(b.whisker_high, v);
  }
  return b;
}

std::map<std::string, BoxStats> size_stats(std::span<const Document> docs) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& d : docs) groups[quality::FilterConfigSet::language_of(d)].push_back(static_cast<double>(d.byte_len()));
  std::map<std::string, BoxStats> out;
  for (auto& [lang, sizes] : groups) out[lang] = box_stats(std::move(sizes));
  return out;
}

Histogram value_histogram(std::span<const double> values, std::size_t bins) {
  std::vector<std::optional<double>> opt(values.begin(), values.end());
  return value_histogram(opt, bins);
}

Histogram value_histogram(std::span<const std::optional<double>> values, std::size_t bins) {
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  Histogram h;
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& v : values) {
    if (!v || std::isnan(*v)) continue;
    lo = any ? std::min(lo, *v) : *v;
    hi = any ? std::max(hi, *v) : *v;
    any = true;
  }
  if (!any) {
    lo = 0.0;
    hi = 1.0;
  } else if (!(hi > lo)) {
    hi = lo + std::max(1e-9, std::abs(lo) * 1e-9);
  }
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (const auto& v : values) {
    if (!v || std::isnan(*v)) {
      ++h.undefined;
      continue;
    }
    auto idx = static_cast<std::size_t>(std::floor((*v - lo) / (hi - lo) * static_cast<double>(bins)));
    idx = std::min(idx, bins - 1);
    ++h.counts[idx];
  }
  return h;
}

std::map<std::string, double> fertility(std::span<const Document> docs, const WordTokenizer& tokenizer,
                                        const std::string& component_key, std::size_t min_docs) {
  struct Acc {
    std::size_t docs = 0;
    std::size_t tokens = 0;
    std::size_t bytes = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& d : docs) {
    auto key = d.meta_string(component_key);
    auto& a = acc[key ? *key : "unknown"];
    ++a.docs;
    a.tokens += tokenizer.tokenize(d.text).size();
    a.bytes += d.byte_len();
  }
  std::map<std::string, double> out;
  for (const auto& [name, a] : acc) {
    if (a.docs < min_docs || a.bytes == 0) continue;
    out[name] = static_cast<double>(a.tokens) / static_cast<double>(a.bytes);
  }
  return out;
}

namespace {

double pct_removed(std::size_t in, std::size_t out) {
  if (in == 0) return 0.0;
  return 100.0 * static_cast<double>(in - std::min(in, out)) / static_cast<double>(in);
}

RemovalRow make_row(const std::string& step, const std::string& lang, const Tally& t) {
  return {step, lang, t, pct_removed(t.docs_in, t.docs_out), pct_removed(t.bytes_in, t.bytes_out)};
}

}  // namespace

std::vector<RemovalRow> removal_report(std::span<const StepReport> steps) {
  std::vector<RemovalRow> rows;
  for (const auto& s : steps) {
    rows.push_back(make_row(s.step, "*", {s.docs_in, s.docs_out, s.bytes_in, s.bytes_out}));
    for (const auto& [lang, t] : s.per_language) rows.push_back(make_row(s.step, lang, t));
  }
  return rows;
}

void write_removal_csv(std::ostream& out, const std::vector<RemovalRow>& rows) {
  out << "step,language,docs_in,docs_out,docs_removed_pct,bytes_in,bytes_out,bytes_removed_pct\n";
  for (const auto& r : rows) {
    out << code::csv_escape(r.step) << ',' << code::csv_escape(r.language) << ',' << r.tally.docs_in << ','
        << r.tally.docs_out << ',' << r.docs_removed_pct << ',' << r.tally.bytes_in << ',' << r.tally.bytes_out
        << ',' << r.bytes_removed_pct << '\n';
  }
}

nlohmann::json to_json(const std::vector<RemovalRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"step", r.step},
                   {"language", r.language},
                   {"docs_in", r.tally.docs_in},
                   {"docs_out", r.tally.docs_out},
                   {"docs_removed_pct", r.docs_removed_pct},
                   {"bytes_in", r.tally.bytes_in},
                   {"bytes_out", r.tally.bytes_out},
                   {"bytes_removed_pct", r.bytes_removed_pct}});
  }
  return out;
}

nlohmann::json to_json(const BoxStats& b) {
  return {{"count", b.count},   {"median", b.median},           {"q1", b.q1},
          {"q3", b.q3},         {"whisker_low", b.whisker_low}, {"whisker_high", b.whisker_high},
          {"outliers", b.outlier_count}};
}

nlohmann::json to_json(const Histogram& h) {
  return {{"edges", h.edges}, {"counts", h.counts}, {"undefined", h.undefined}};
}

nlohmann::json corpus_summary(std::span<const Document> docs, std::size_t fertility_min_docs) {
  std::size_t bytes = 0;
  for (const auto& d : docs) bytes += d.byte_len();
  nlohmann::json sizes = nlohmann::json::object();
  for (const auto& [lang, b] : size_stats(docs)) sizes[lang] = to_json(b);
  const WhitespaceTokenizer tok;
  nlohmann::json fert = nlohmann::json::object();
  for (const auto& [name, f] : fertility(docs, tok, "source", fertility_min_docs)) fert[name] = f;
  return {{"n_docs", docs.size()}, {"total_bytes", bytes}, {"size_stats", sizes}, {"fertility", fert}};
}

void write_size_csv(std::ostream& out, const std::map<std::string, BoxStats>& stats) {
  out << "language,count,median,q1,q3,whisker_low,whisker_high,outliers\n";
  for (const auto& [lang, b] : stats) {
    out << code::csv_escape(lang) << ',' << b.count << ',' << b.median << ',' << b.q1 << ',' << b.q3 << ','
        << b.whisker_low << ',' << b.whisker_high << ',' << b.outlier_count << '\n';
  }
}

}  // namespace analysis
}  // namespace textmill
