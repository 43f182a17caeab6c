#include "textmill/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "textmill/clean.hpp"
#include "textmill/dedup.hpp"
#include "textmill/parallel.hpp"
#include "textmill/pii.hpp"
#include "textmill/quality.hpp"

namespace textmill {

std::string_view to_string(StepScope s) noexcept { return s == StepScope::document ? "document" : "dataset"; }
std::string_view to_string(StepKind k) noexcept { return k == StepKind::cleaning ? "cleaning" : "filtering"; }

// ---- parameters ------------------------------------------------------------

ParamReader::ParamReader(const nlohmann::json& params, std::string path, std::string base_dir)
    : params_(params), path_(std::move(path)), base_dir_(std::move(base_dir)) {}

void ParamReader::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(path_ + "." + key + ": " + message);
}

const nlohmann::json& ParamReader::get_raw(const std::string& key) {
  used_.push_back(key);
  return params_.at(key);
}

std::size_t ParamReader::get_count(const std::string& key, std::optional<std::size_t> fallback) {
  if (!has(key)) {
    if (!fallback) fail(key, "required parameter missing");
    return *fallback;
  }
  const auto& v = get_raw(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

double ParamReader::get_real(const std::string& key, std::optional<double> fallback) {
  if (!has(key)) {
    if (!fallback) fail(key, "required parameter missing");
    return *fallback;
  }
  const auto& v = get_raw(key);
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

std::string ParamReader::get_string(const std::string& key, std::optional<std::string> fallback) {
  if (!has(key)) {
    if (!fallback) fail(key, "required parameter missing");
    return *fallback;
  }
  const auto& v = get_raw(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> ParamReader::get_list(const std::string& key) {
  std::vector<std::string> out;
  if (has(key)) {
    const auto& v = get_raw(key);
    if (!v.is_array()) fail(key, "expected an array of strings");
    for (const auto& item : v) {
      if (!item.is_string()) fail(key, "expected an array of strings");
      out.push_back(item.get<std::string>());
    }
    return out;
  }
  const std::string file_key = key + "_file";
  if (!has(file_key)) fail(key, "required parameter missing (or " + file_key + ")");
  const std::string file = resolve(get_string(file_key));
  std::ifstream in(file);
  if (!in) fail(file_key, "cannot open " + file);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string ParamReader::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir_) / p).string();
}

void ParamReader::finish() const {
  for (const auto& [key, value] : params_.items()) {
    if (std::find(used_.begin(), used_.end(), key) == used_.end()) fail(key, "unknown parameter");
  }
}

// ---- registry --------------------------------------------------------------

namespace {

struct Registry {
  std::mutex mu;
  std::map<std::string, StepFactory> exact;
  std::map<std::string, StepFactory> prefixed;
};

void register_builtins(Registry& r);

Registry& registry() {
  static Registry* r = [] {
    auto* reg = new Registry();
    register_builtins(*reg);
    return reg;
  }();
  return *r;
}

std::optional<StepFactory> find_factory(const std::string& name) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  if (auto it = r.exact.find(name); it != r.exact.end()) return it->second;
  const StepFactory* best = nullptr;
  std::size_t best_len = 0;
  for (const auto& [prefix, factory] : r.prefixed) {
    if (name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0 && prefix.size() > best_len) {
      best = &factory;
      best_len = prefix.size();
    }
  }
  if (best) return *best;
  return std::nullopt;
}

BoundStep text_step(std::function<std::string(std::string_view)> fn) {
  BoundStep s;
  s.apply_doc = [fn = std::move(fn)](Document& d, StepLog&) {
    d.text = fn(d.text);
    return true;
  };
  return s;
}

BoundStep keep_step(std::function<bool(const Document&)> pred) {
  BoundStep s;
  s.kind = StepKind::filtering;
  s.apply_doc = [pred = std::move(pred)](Document& d, StepLog&) { return pred(d); };
  return s;
}

BoundStep dataset_step(StepKind kind, std::function<Dataset(const Dataset&, std::size_t, nlohmann::json&)> fn) {
  BoundStep s;
  s.scope = StepScope::dataset;
  s.kind = kind;
  s.apply_dataset = std::move(fn);
  return s;
}

StepFactory fixed(BoundStep step) {
  return [step](ParamReader& p, const std::string&) {
    p.finish();
    return step;
  };
}

StepFactory line_filter(const std::vector<std::string>& patterns) {
  return fixed(text_step([&patterns](std::string_view t) { return clean::remove_lines_with_substrings(t, patterns); }));
}

std::string suffix_of(const std::string& name, std::string_view prefix) { return name.substr(prefix.size()); }

StepFactory exact_dedup(clean::KeyKind kind) {
  return fixed(dataset_step(StepKind::filtering, [kind](const Dataset& docs, std::size_t, nlohmann::json& details) {
    std::vector<std::string> removed;
    auto out = clean::dedup_exact(docs, kind, &removed);
    details["removed_ids"] = removed;
    return out;
  }));
}

StepFactory template_lines(std::optional<clean::TemplateLineOptions> preset) {
  return [preset](ParamReader& p, const std::string&) {
    clean::TemplateLineOptions opts;
    if (preset) {
      opts = *preset;
    } else {
      opts.min_len = p.get_count("min_len", opts.min_len);
      opts.min_count = p.get_count("min_count", opts.min_count);
      if (opts.min_count < 1) p.fail("min_count", "must be >= 1");
    }
    p.finish();
    return dataset_step(StepKind::cleaning, [opts](const Dataset& docs, std::size_t threads, nlohmann::json&) {
      return clean::dedup_template_lines(docs, opts, threads);
    });
  };
}

Dataset drop_indices(const Dataset& docs, const std::vector<std::size_t>& removed) {
  Dataset out;
  out.reserve(docs.size() - removed.size());
  std::size_t r = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (r < removed.size() && removed[r] == i) {
      ++r;
      continue;
    }
    out.push_back(docs[i]);
  }
  return out;
}

void cluster_details(nlohmann::json& details, const Dataset& docs, const dedup::ClusterResult& res) {
  details["clusters"] = res.clusters.size();
  std::vector<std::string> ids;
  for (auto i : res.removed) ids.push_back(docs[i].id);
  details["removed_ids"] = ids;
}

using NearFn = dedup::ClusterResult (*)(std::span<const Document>, const dedup::DedupConfig&, std::size_t);

BoundStep near_dedup_step(const dedup::DedupConfig& config, NearFn fn) {
  config.validate();
  return dataset_step(StepKind::filtering, [config, fn](const Dataset& docs, std::size_t threads, nlohmann::json& details) {
    auto res = fn(docs, config, threads);
    cluster_details(details, docs, res);
    return drop_indices(docs, res.removed);
  });
}

dedup::ClusterResult substring_adapter(std::span<const Document> docs, const dedup::DedupConfig& c, std::size_t) {
  return dedup::substring_dedup(docs, c);
}

std::shared_ptr<const quality::FilterConfigSet> load_filter_set(ParamReader& p) {
  if (!p.has("config")) p.fail("config", "required parameter missing");
  const auto& raw = p.get_raw("config");
  try {
    if (raw.is_string()) return std::make_shared<const quality::FilterConfigSet>(quality::FilterConfigSet::load(p.resolve(raw.get<std::string>())));
    if (raw.is_object()) return std::make_shared<const quality::FilterConfigSet>(quality::FilterConfigSet::from_json(raw, p.resolve(".")));
  } catch (const ConfigError& e) {
    p.fail("config", e.what());
  }
  p.fail("config", "expected a file path or an object");
}

StepFactory quality_step(std::optional<quality::Indicator> only) {
  return [only](ParamReader& p, const std::string&) {
    auto set = load_filter_set(p);
    const std::string forced = p.get_string("language", "");
    p.finish();
    auto scorers = std::make_shared<std::map<std::string, quality::Scorers>>();
    for (const auto& [lang, cfg] : set->configs()) (*scorers)[lang] = set->scorers_for(cfg);
    BoundStep s;
    s.kind = StepKind::filtering;
    s.apply_doc = [set, scorers, forced, only](Document& d, StepLog&) {
      const std::string language = forced.empty() ? quality::FilterConfigSet::language_of(d) : forced;
      const quality::FilterConfig* cfg = set->find(language);
      if (!cfg) throw ConfigError("no filter config for language '" + language + "'");
      const auto values = quality::compute_values(d, *cfg, scorers->at(cfg->language));
      const auto verdict = quality::apply_filters(values, *cfg);
      if (!only) return verdict.kept;
      return std::find(verdict.failed.begin(), verdict.failed.end(), *only) == verdict.failed.end();
    };
    return s;
  };
}

void register_builtins(Registry& r) {
  auto& e = r.exact;
  e["replace_newline_with_space"] = fixed(text_step(clean::replace_newline_with_space));
  e["remove_lines_with_code"] = line_filter(clean::code_substrings());
  e["remove_html_spans"] = line_filter(clean::html_span_substrings());
  e["remove_html_spans_sanad"] = line_filter(clean::sanad_substrings());
  e["remove_wiki_mojibake"] = line_filter(clean::wiki_mojibake_substrings());
  e["strip_substrings_en_wiktionary"] = fixed(text_step(
      [](std::string_view t) { return clean::strip_substrings(t, clean::en_wiktionary_phrases()); }));
  e["remove_lines_with_substrings"] = [](ParamReader& p, const std::string&) {
    auto patterns = p.get_list("patterns");
    if (patterns.empty()) p.fail("patterns", "must not be empty");
    p.finish();
    return text_step([patterns](std::string_view t) { return clean::remove_lines_with_substrings(t, patterns); });
  };
  e["strip_substrings"] = [](ParamReader& p, const std::string&) {
    auto phrases = p.get_list("phrases");
    p.finish();
    return text_step([phrases](std::string_view t) { return clean::strip_substrings(t, phrases); });
  };
  e["normalize_doc"] = [](ParamReader& p, const std::string&) {
    const auto max_len = p.get_count("max_word_len", quality::kDefaultMaxWordLen);
    p.finish();
    return text_step([max_len](std::string_view t) { return quality::normalize_doc(t, max_len); });
  };
  r.prefixed["remove_references_"] = [](ParamReader& p, const std::string&) {
    auto stopwords = p.get_list("stopwords");
    const double min_ratio = p.get_real("min_ratio");
    if (!(min_ratio >= 0.0 && min_ratio <= 1.0)) p.fail("min_ratio", "must be in [0,1]");
    p.finish();
    return text_step([stopwords, min_ratio](std::string_view t) {
      return clean::remove_low_stopword_lines(t, stopwords, min_ratio);
    });
  };
  r.prefixed["split_sentences_"] = [](ParamReader&, const std::string& name) -> BoundStep {
    throw ConfigError("no sentence splitter registered for " + name);
  };

  e["filter_remove_empty_docs"] = fixed(keep_step(clean::keep_nonempty));
  e["filter_wiki_user_titles"] = fixed(keep_step(clean::keep_non_user_title));
  e["filter_wiki_non_text_type"] = fixed(keep_step(clean::keep_text_type));
  e["filter_small_docs"] = [](ParamReader& p, const std::string&) {
    const auto min_words = p.get_count("min_words", 15);
    p.finish();
    return keep_step([min_words](const Document& d) { return clean::keep_min_words(d, min_words); });
  };
  e["filter_small_docs_bytes"] = [](ParamReader& p, const std::string&) {
    const auto min_bytes = p.get_count("min_bytes");
    p.finish();
    return keep_step([min_bytes](const Document& d) { return clean::keep_min_bytes(d, min_bytes); });
  };
  r.prefixed["filter_small_docs_bytes_"] = [](ParamReader& p, const std::string& name) {
    const std::string digits = suffix_of(name, "filter_small_docs_bytes_");
    std::size_t min_bytes = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), min_bytes);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) throw ConfigError("unknown step " + name);
    p.finish();
    return keep_step([min_bytes](const Document& d) { return clean::keep_min_bytes(d, min_bytes); });
  };

  e["dedup_template_soft"] = template_lines(clean::TemplateLineOptions{15, 10});
  e["dedup_pseudocrawl_newspapers"] = template_lines(clean::TemplateLineOptions{1, 2});
  e["dedup_template_lines"] = template_lines(std::nullopt);
  e["remove_menu_lines"] = [](ParamReader& p, const std::string&) {
    const double frac = p.get_real("max_page_fraction", 0.01);
    if (!(frac >= 0.0 && frac < 1.0)) p.fail("max_page_fraction", "must be in [0,1)");
    p.finish();
    return dataset_step(StepKind::cleaning, [frac](const Dataset& docs, std::size_t threads, nlohmann::json&) {
      return clean::remove_menu_lines(docs, frac, threads);
    });
  };
  e["dedup_document"] = exact_dedup(clean::KeyKind::text);
  e["dedup_document_on_url"] = exact_dedup(clean::KeyKind::url);
  e["dedup_document_on_url_amp"] = exact_dedup(clean::KeyKind::url_amp);
  e["dedup_document_on_url_keep_id"] = exact_dedup(clean::KeyKind::url_keep_id);
  e["dedup_document_on_url_lm_es_pseudocrawl-filtered_341_es_cointelegraph_com"] = exact_dedup(clean::KeyKind::url_amp);
  e["dedup_document_on_url_lm_en_pseudocrawl_filtered_619_www_qut_edu_au"] = exact_dedup(clean::KeyKind::url_keep_id);
  e["concatenate_lm_fr_ester"] = fixed(dataset_step(
      StepKind::filtering, [](const Dataset& docs, std::size_t, nlohmann::json&) { return clean::sort_concat_by_meta(docs, "id"); }));
  e["sort_concat_by_meta"] = [](ParamReader& p, const std::string&) {
    const std::string key = p.get_string("key");
    p.finish();
    return dataset_step(StepKind::filtering, [key](const Dataset& docs, std::size_t, nlohmann::json&) {
      return clean::sort_concat_by_meta(docs, key);
    });
  };

  e["quality_filters"] = quality_step(std::nullopt);
  e["filter_number_words"] = quality_step(quality::Indicator::min_words);
  e["filter_character_repetition"] = quality_step(quality::Indicator::char_rep);
  e["filter_word_repetition"] = quality_step(quality::Indicator::word_rep);
  e["filter_special_characters"] = quality_step(quality::Indicator::special);
  e["filter_closed_class_words"] = quality_step(quality::Indicator::closed);
  e["filter_flagged_words"] = quality_step(quality::Indicator::flagged);
  e["filter_lang_id"] = quality_step(quality::Indicator::langid);
  e["filter_perplexity"] = quality_step(quality::Indicator::perplexity);

  e["dedup_simhash"] = [](ParamReader& p, const std::string&) {
    dedup::DedupConfig c;
    c.simhash_n = p.get_count("n", c.simhash_n);
    c.hamming_max = static_cast<int>(p.get_count("hamming_max", static_cast<std::size_t>(c.hamming_max)));
    c.long_doc_chars = p.get_count("long_doc_chars", c.long_doc_chars);
    p.finish();
    return near_dedup_step(c, dedup::find_near_dups);
  };
  e["dedup_substring"] = [](ParamReader& p, const std::string&) {
    dedup::DedupConfig c;
    c.substring_min_len = p.get_count("min_len", c.substring_min_len);
    c.long_doc_chars = p.get_count("long_doc_chars", c.long_doc_chars);
    p.finish();
    return near_dedup_step(c, substring_adapter);
  };
  e["dedup_minhash"] = [](ParamReader& p, const std::string&) {
    dedup::DedupConfig c;
    c.minhash_perms = p.get_count("perms", c.minhash_perms);
    c.lsh_bands = p.get_count("bands", c.lsh_bands);
    c.lsh_rows = p.get_count("rows", c.lsh_rows);
    c.jaccard_min = p.get_real("jaccard_min", c.jaccard_min);
    c.shingle_n = p.get_count("shingle_n", c.shingle_n);
    c.seed = p.get_count("seed", c.seed);
    p.finish();
    return near_dedup_step(c, dedup::minhash_dedup);
  };

  e["pii_redact"] = fixed([] {
    BoundStep s;
    s.apply_doc = [](Document& d, StepLog& log) {
      auto res = pii::redact(d.text);
      if (res.redactions.empty()) return true;
      for (const auto& red : res.redactions) log.push_back(pii::to_json(red, d.id));
      d.text = std::move(res.text);
      return true;
    };
    return s;
  }());
}

}  // namespace

void register_step(const std::string& name, StepFactory factory, bool prefix) {
  if (name.empty()) throw ConfigError("step name must not be empty");
  auto& r = registry();
  std::lock_guard lock(r.mu);
  (prefix ? r.prefixed : r.exact)[name] = std::move(factory);
}

bool is_registered_step(const std::string& name) { return find_factory(name).has_value(); }

std::vector<std::string> registered_steps() {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  std::vector<std::string> out;
  for (const auto& [name, f] : r.exact) out.push_back(name);
  return out;
}

// ---- parsing ---------------------------------------------------------------

Pipeline Pipeline::from_json(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("pipeline config must be an object");
  if (!j.contains("steps")) throw ConfigError("steps: required");
  const auto& steps = j.at("steps");
  if (!steps.is_array()) throw ConfigError("steps: expected an array");
  for (const auto& [key, v] : j.items()) {
    if (key != "steps") throw ConfigError(key + ": unknown field");
  }
  Pipeline p;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string path = "steps[" + std::to_string(i) + "]";
    const auto& entry = steps[i];
    if (!entry.is_object()) throw ConfigError(path + ": expected an object");
    if (!entry.contains("name") || !entry.at("name").is_string()) throw ConfigError(path + ".name: expected a string");
    for (const auto& [key, v] : entry.items()) {
      if (key != "name" && key != "params") throw ConfigError(path + "." + key + ": unknown field");
    }
    StepSpec spec;
    spec.name = entry.at("name").get<std::string>();
    if (entry.contains("params")) spec.params = entry.at("params");
    if (!spec.params.is_object()) throw ConfigError(path + ".params: expected an object");
    auto factory = find_factory(spec.name);
    if (!factory) throw ConfigError(path + ".name: unknown step '" + spec.name + "'");
    ParamReader reader(spec.params, path + ".params", base_dir);
    BoundStep bound;
    try {
      bound = (*factory)(reader, spec.name);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind(path, 0) == 0) throw;
      throw ConfigError(path + ": " + msg);
    }
    spec.scope = bound.scope;
    spec.kind = bound.kind;
    p.specs_.push_back(std::move(spec));
    p.bound_.push_back(std::move(bound));
  }
  return p;
}

Pipeline Pipeline::parse(std::string_view source, const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(source);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  return from_json(j, base_dir);
}

Pipeline Pipeline::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pipeline config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto parent = std::filesystem::path(path).parent_path();
  return parse(buf.str(), parent.empty() ? "." : parent.string());
}

nlohmann::json Pipeline::to_json() const {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : specs_) steps.push_back({{"name", s.name}, {"params", s.params}});
  return {{"steps", steps}};
}

// ---- execution -------------------------------------------------------------

namespace {

struct DocFailure : std::runtime_error {
  DocFailure(std::size_t i, const std::string& what) : std::runtime_error(what), index(i) {}
  std::size_t index;
};

void tally(std::map<std::string, Tally>& per_lang, const Dataset& docs, bool input) {
  for (const auto& d : docs) {
    auto& t = per_lang[quality::FilterConfigSet::language_of(d)];
    (input ? t.docs_in : t.docs_out) += 1;
    (input ? t.bytes_in : t.bytes_out) += d.byte_len();
  }
}

std::size_t total_bytes(const Dataset& docs) {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.byte_len();
  return n;
}

const Document* find_doc(const Dataset& docs, const std::string& id) {
  for (const auto& d : docs) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

}  // namespace

Pipeline::Result Pipeline::run(Dataset docs, std::size_t threads) const {
  Options o;
  o.threads = threads;
  return run(std::move(docs), o);
}

Pipeline::Result Pipeline::run(Dataset docs, const Options& options) const {
  const std::size_t threads = resolve_threads(options.threads);
  Result result;
  bool trace_gone = false;
  for (std::size_t s = 0; s < specs_.size(); ++s) {
    const auto& spec = specs_[s];
    const auto& step = bound_[s];
    StepReport rep;
    rep.step = spec.name;
    rep.scope = std::string(to_string(spec.scope));
    rep.kind = std::string(to_string(spec.kind));
    rep.docs_in = docs.size();
    rep.bytes_in = total_bytes(docs);
    tally(rep.per_language, docs, true);

    std::optional<std::string> trace_before;
    if (options.trace_id && !trace_gone) {
      if (const auto* d = find_doc(docs, *options.trace_id)) trace_before = d->text;
    }

    const auto start = std::chrono::steady_clock::now();
    Dataset out;
    if (step.scope == StepScope::document) {
      const std::size_t n = docs.size();
      std::vector<char> keep(n, 1);
      std::vector<char> modified(n, 0);
      std::vector<StepLog> logs(n);
      try {
        parallel_for(n, threads, [&](std::size_t i) {
          try {
            const std::string before = docs[i].text;
            keep[i] = step.apply_doc(docs[i], logs[i]) ? 1 : 0;
            modified[i] = docs[i].text != before;
          } catch (const std::exception& e) {
            throw DocFailure(i, e.what());
          }
        });
      } catch (const DocFailure& f) {
        throw PipelineError("step " + spec.name + " failed on document " + docs[f.index].id + ": " + f.what(), spec.name,
                            docs[f.index].id, result.reports);
      }
      std::size_t log_records = 0;
      for (std::size_t i = 0; i < n; ++i) {
        rep.docs_modified += modified[i];
        for (const auto& rec : logs[i]) {
          ++log_records;
          if (options.log) options.log(rec);
        }
        if (keep[i]) out.push_back(std::move(docs[i]));
      }
      if (log_records) rep.details["log_records"] = log_records;
    } else {
      try {
        out = step.apply_dataset(docs, threads, rep.details);
      } catch (const std::exception& e) {
        throw PipelineError("step " + spec.name + " failed: " + e.what(), spec.name, "", result.reports);
      }
      if (out.size() == docs.size()) {
        for (std::size_t i = 0; i < out.size(); ++i) rep.docs_modified += out[i].text != docs[i].text;
      }
    }
    rep.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    rep.docs_out = out.size();
    rep.bytes_out = total_bytes(out);
    tally(rep.per_language, out, false);

    if (options.trace_id) {
      TraceEntry t;
      t.step = spec.name;
      if (trace_before) {
        t.text_before = *trace_before;
        const auto* after = find_doc(out, *options.trace_id);
        if (after) {
          t.text_after = after->text;
          t.changed = t.text_after != t.text_before;
        } else {
          t.removed = true;
          t.changed = true;
          trace_gone = true;
        }
      } else {
        t.removed = true;
        trace_gone = true;
      }
      result.trace.push_back(std::move(t));
    }

    result.reports.push_back(std::move(rep));
    docs = std::move(out);
  }
  result.docs = std::move(docs);
  return result;
}

nlohmann::json reports_to_json(const std::vector<StepReport>& reports, bool include_timing) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& r : reports) steps.push_back(r.to_json(include_timing));
  return steps;
}

}  // namespace textmill
