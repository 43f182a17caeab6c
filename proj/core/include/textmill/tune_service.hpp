#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmill/document.hpp"
#include "textmill/quality.hpp"

namespace textmill::service {

struct ServiceOptions {
  std::size_t max_docs = 50000;
  std::size_t threads = 1;
  /// Word lists, tokenizers and models used to compute values at upload.
  std::shared_ptr<const quality::FilterConfigSet> filters;
  /// Directory holding named pipeline configs for the trace endpoint.
  std::string pipeline_dir = ".";
  std::string cors_origin = "*";
  std::size_t example_cap = 20;
  std::size_t example_chars = 500;
};

struct Request {
  std::string method;
  std::string path;  // decoded, without query string
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Uploaded sample with its filter values computed once.
struct Sample {
  std::string id;
  Dataset docs;
  std::vector<quality::FilterValues> values;
  std::map<std::string, std::size_t> index;  // doc id -> position
};

class TuneService {
 public:
  explicit TuneService(ServiceOptions options = {});
  ~TuneService();

  /// Routes one request; no sockets involved.
  Response handle(const Request& req);

  /// Serves HTTP on host:port until stop(). Port 0 binds any free port.
  void listen(const std::string& host, int port);
  /// Port chosen by listen(), valid once running() is true.
  int bound_port() const noexcept { return port_.load(); }
  bool running() const noexcept;
  void stop();

  std::shared_ptr<const Sample> sample(const std::string& id) const;

 private:
  Response upload(const Request& req);
  Response histogram(const Sample& s, const std::string& indicator, const Request& req);
  Response simulate(const Sample& s, const Request& req);
  Response trace(const Sample& s, const std::string& doc_id, const Request& req);
  Response doc_values(const Sample& s, const std::string& doc_id);
  std::string new_id();

  ServiceOptions options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const Sample>> samples_;
  std::atomic<int> port_{0};
  std::atomic<unsigned long long> counter_{0};
  struct Server;
  std::unique_ptr<Server> server_;
};

}  // namespace textmill::service
