#include "textmill/tune_service.hpp"

#include <filesystem>
#include <mutex>
#include <random>
#include <sstream>

#include <httplib.h>

#include "textmill/analysis.hpp"
#include "textmill/parallel.hpp"
#include "textmill/pipeline.hpp"
#include "textmill/unicode.hpp"

namespace textmill::service {

struct TuneService::Server {
  httplib::Server http;
};

namespace {

Response json_response(int status, const nlohmann::json& body) { return {status, body.dump(), "application/json"}; }

Response error(int status, const std::string& message) { return json_response(status, {{"error", message}}); }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t slash = path.find('/', start);
    if (slash == std::string::npos) slash = path.size();
    if (slash > start) parts.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

std::string truncate_chars(const std::string& text, std::size_t max_chars) {
  std::size_t pos = 0;
  std::size_t count = 0;
  while (pos < text.size() && count < max_chars) {
    unicode::next_code_point(text, pos);
    ++count;
  }
  return text.substr(0, pos);
}

// Threshold fields of the per-language filter schema.
struct ThresholdField {
  quality::Indicator ind;
  const char* group;  // nullptr for top-level
  const char* key;
};

constexpr ThresholdField kFields[] = {
    {quality::Indicator::min_words, nullptr, "min_words"},
    {quality::Indicator::char_rep, "char_rep", "max_ratio"},
    {quality::Indicator::word_rep, "word_rep", "max_ratio"},
    {quality::Indicator::special, "special", "max_ratio"},
    {quality::Indicator::closed, "closed", "min_ratio"},
    {quality::Indicator::flagged, "flagged", "max_ratio"},
    {quality::Indicator::langid, "langid", "min_conf"},
    {quality::Indicator::perplexity, "perplexity", "max"},
};

bool is_threshold_key(const std::string& key) {
  for (const auto& f : kFields) {
    if (key == (f.group ? f.group : f.key)) return true;
  }
  return false;
}

using Thresholds = std::map<quality::Indicator, std::optional<double>>;

Thresholds parse_thresholds(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  Thresholds out;
  for (const auto& f : kFields) out[f.ind] = std::nullopt;
  for (const auto& f : kFields) {
    const nlohmann::json* node = &j;
    std::string path = where;
    if (f.group) {
      if (!j.contains(f.group)) continue;
      node = &j.at(f.group);
      path += std::string(".") + f.group;
      if (!node->is_object()) throw ConfigError(path + ": expected an object");
    }
    if (!node->contains(f.key)) continue;
    const auto& v = node->at(f.key);
    if (v.is_null()) continue;
    if (!v.is_number()) throw ConfigError(path + "." + f.key + ": expected a number");
    out[f.ind] = v.get<double>();
  }
  return out;
}

}  // namespace

TuneService::TuneService(ServiceOptions options) : options_(std::move(options)), server_(std::make_unique<Server>()) {
  if (!options_.filters) options_.filters = std::make_shared<const quality::FilterConfigSet>();
}

TuneService::~TuneService() { stop(); }

std::string TuneService::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream out;
  out << "ds" << ++counter_ << '-' << std::hex << (rng() & 0xffffffffffULL);
  return out.str();
}

std::shared_ptr<const Sample> TuneService::sample(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = samples_.find(id);
  return it == samples_.end() ? nullptr : it->second;
}

Response TuneService::handle(const Request& req) {
  try {
    if (req.method == "OPTIONS") return {204, "", "text/plain"};
    const auto parts = split_path(req.path);
    if (parts.size() < 2 || parts[0] != "api" || parts[1] != "datasets") return error(404, "not found");
    if (parts.size() == 2) {
      if (req.method != "POST") return error(405, "method not allowed");
      return upload(req);
    }
    auto s = sample(parts[2]);
    if (!s) return error(404, "unknown dataset " + parts[2]);
    if (parts.size() == 3 && req.method == "GET")
      return json_response(200, {{"dataset_id", s->id}, {"n_docs", s->docs.size()}});
    if (parts.size() == 5 && parts[3] == "histogram" && req.method == "GET") return histogram(*s, parts[4], req);
    if (parts.size() == 4 && parts[3] == "simulate") {
      if (req.method != "POST") return error(405, "method not allowed");
      return simulate(*s, req);
    }
    if (parts.size() == 5 && parts[3] == "docs" && req.method == "GET") return doc_values(*s, parts[4]);
    if (parts.size() == 6 && parts[3] == "docs" && parts[5] == "trace" && req.method == "GET")
      return trace(*s, parts[4], req);
    return error(404, "not found");
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

Response TuneService::upload(const Request& req) {
  auto sample = std::make_shared<Sample>();
  {
    std::istringstream in(req.body);
    JsonlReader reader(in, "upload");
    try {
      while (auto doc = reader.next()) {
        if (sample->docs.size() >= options_.max_docs)
          return error(413, "sample exceeds " + std::to_string(options_.max_docs) + " documents");
        sample->docs.push_back(std::move(*doc));
      }
    } catch (const FormatError& e) {
      return error(400, e.what());
    }
  }
  if (sample->docs.empty()) return error(400, "empty sample");
  for (std::size_t i = 0; i < sample->docs.size(); ++i) {
    if (!sample->index.emplace(sample->docs[i].id, i).second)
      return error(400, "duplicate document id " + sample->docs[i].id);
  }

  const auto& filters = *options_.filters;
  sample->values.resize(sample->docs.size());
  try {
    parallel_for(sample->docs.size(), options_.threads, [&](std::size_t i) {
      const auto& doc = sample->docs[i];
      const quality::FilterConfig* cfg = filters.find(quality::FilterConfigSet::language_of(doc));
      const quality::FilterConfig fallback;
      const auto& use = cfg ? *cfg : fallback;
      sample->values[i] = quality::compute_values(doc, use, filters.scorers_for(use));
    });
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }

  sample->id = new_id();
  const std::size_t n = sample->docs.size();
  const std::string id = sample->id;
  {
    std::unique_lock lock(mu_);
    samples_[id] = std::move(sample);
  }
  return json_response(200, {{"dataset_id", id}, {"n_docs", n}});
}

Response TuneService::histogram(const Sample& s, const std::string& indicator, const Request& req) {
  const auto ind = quality::parse_indicator(indicator);
  if (!ind) return error(404, "unknown indicator " + indicator);
  std::size_t bins = 20;
  if (auto it = req.query.find("bins"); it != req.query.end()) {
    try {
      std::size_t used = 0;
      const long long b = std::stoll(it->second, &used);
      if (used != it->second.size() || b < 1 || b > 10000) throw std::invalid_argument("bins");
      bins = static_cast<std::size_t>(b);
    } catch (const std::exception&) {
      return error(400, "bins must be an integer in [1, 10000]");
    }
  }
  std::vector<std::optional<double>> values;
  values.reserve(s.values.size());
  for (const auto& v : s.values) values.push_back(v.value(*ind));
  auto body = analysis::to_json(analysis::value_histogram(values, bins));
  body["indicator"] = std::string(quality::to_string(*ind));
  body["n_docs"] = s.docs.size();
  return json_response(200, body);
}

Response TuneService::simulate(const Sample& s, const Request& req) {
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    return error(400, std::string("invalid JSON: ") + e.what());
  }
  if (!body.is_object()) return error(400, "thresholds must be a JSON object");

  // Either one threshold object for every language, or one per language.
  std::map<std::string, Thresholds> by_lang;
  try {
    bool flat = body.empty();
    for (const auto& [key, v] : body.items()) flat = flat || is_threshold_key(key);
    if (flat) {
      by_lang["default"] = parse_thresholds(body, "thresholds");
    } else {
      for (const auto& [lang, v] : body.items()) by_lang[lang] = parse_thresholds(v, lang);
    }
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }

  std::map<std::string, quality::FilterConfig> configs;
  try {
    for (const auto& [lang, t] : by_lang) {
      quality::FilterConfig cfg;
      cfg.language = lang;
      for (const auto& [ind, value] : t) cfg.set_threshold(ind, value);
      cfg.validate();
      configs[lang] = std::move(cfg);
    }
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }

  std::size_t kept = 0;
  std::map<quality::Indicator, std::size_t> per_indicator;
  for (auto ind : quality::kIndicators) per_indicator[ind] = 0;
  nlohmann::json kept_examples = nlohmann::json::array();
  nlohmann::json removed_examples = nlohmann::json::array();
  for (std::size_t i = 0; i < s.docs.size(); ++i) {
    const auto& doc = s.docs[i];
    const auto lang = quality::FilterConfigSet::language_of(doc);
    auto it = configs.find(lang);
    if (it == configs.end()) it = configs.find("default");
    quality::Verdict verdict;
    if (it != configs.end()) verdict = quality::apply_filters(s.values[i], it->second);
    for (auto ind : verdict.failed) ++per_indicator[ind];
    nlohmann::json example = {{"id", doc.id}, {"text", truncate_chars(doc.text, options_.example_chars)}};
    if (verdict.kept) {
      ++kept;
      if (kept_examples.size() < options_.example_cap) kept_examples.push_back(std::move(example));
    } else if (removed_examples.size() < options_.example_cap) {
      nlohmann::json failed = nlohmann::json::array();
      for (auto ind : verdict.failed) failed.push_back(std::string(quality::to_string(ind)));
      example["failed"] = failed;
      removed_examples.push_back(std::move(example));
    }
  }
  nlohmann::json per = nlohmann::json::object();
  for (auto ind : quality::kIndicators) per[std::string(quality::to_string(ind))] = per_indicator[ind];
  return json_response(200, {{"n_docs", s.docs.size()},
                             {"kept", kept},
                             {"removed", s.docs.size() - kept},
                             {"per_indicator_removed", per},
                             {"removed_examples", removed_examples},
                             {"kept_examples", kept_examples}});
}

Response TuneService::doc_values(const Sample& s, const std::string& doc_id) {
  auto it = s.index.find(doc_id);
  if (it == s.index.end()) return error(404, "unknown document " + doc_id);
  const auto& doc = s.docs[it->second];
  return json_response(200, {{"id", doc.id},
                             {"text", doc.text},
                             {"meta", nlohmann::json::parse(doc.meta.dump())},
                             {"values", quality::to_json(s.values[it->second])}});
}

Response TuneService::trace(const Sample& s, const std::string& doc_id, const Request& req) {
  if (!s.index.count(doc_id)) return error(404, "unknown document " + doc_id);
  auto it = req.query.find("config");
  if (it == req.query.end() || it->second.empty()) return error(400, "missing config parameter");
  const std::string& config = it->second;
  Pipeline pipeline;
  try {
    if (config.front() == '{') {
      pipeline = Pipeline::parse(config, options_.pipeline_dir);
    } else {
      const std::filesystem::path rel(config);
      for (const auto& part : rel) {
        if (part == "..") return error(400, "config name must stay inside the pipeline directory");
      }
      if (rel.is_absolute()) return error(400, "config name must stay inside the pipeline directory");
      const auto full = std::filesystem::path(options_.pipeline_dir) / rel;
      if (!std::filesystem::is_regular_file(full)) return error(404, "unknown pipeline config " + config);
      pipeline = Pipeline::load(full.string());
    }
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }
  Pipeline::Options opts;
  opts.threads = options_.threads;
  opts.trace_id = doc_id;
  Pipeline::Result res;
  try {
    res = pipeline.run(s.docs, opts);
  } catch (const PipelineError& e) {
    return error(422, e.what());
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : res.trace) {
    out.push_back({{"step", t.step},
                   {"text_before", t.text_before},
                   {"text_after", t.text_after},
                   {"changed", t.changed},
                   {"removed", t.removed}});
  }
  return json_response(200, out);
}

void TuneService::listen(const std::string& host, int port) {
  auto& http = server_->http;
  http.set_payload_max_length(512ull * 1024 * 1024);
  http.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});
  auto bridge = [this](const httplib::Request& hreq, httplib::Response& hres) {
    Request req;
    req.method = hreq.method;
    req.path = hreq.path;
    for (const auto& [k, v] : hreq.params) req.query.emplace(k, v);
    req.body = hreq.body;
    const Response res = handle(req);
    hres.status = res.status;
    if (!res.body.empty() || res.status != 204) hres.set_content(res.body, res.content_type);
  };
  http.Get(".*", bridge);
  http.Post(".*", bridge);
  http.Options(".*", bridge);
  int bound = 0;
  if (port == 0) {
    bound = http.bind_to_any_port(host);
  } else if (http.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  port_ = bound;
  http.listen_after_bind();
}

bool TuneService::running() const noexcept { return server_ && server_->http.is_running(); }

void TuneService::stop() {
  if (server_) server_->http.stop();
}

}  // namespace textmill::service
