#include "textmill/range_fetch.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <istream>
#include <thread>

namespace textmill::warc {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw NetworkError("not an absolute URL: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http") throw NetworkError("unsupported URL scheme '" + scheme + "' in " + url);
  const std::size_t path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  return out;
}

bool transient(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

}  // namespace

HttpRangeClient::HttpRangeClient(std::chrono::milliseconds timeout) : timeout_(timeout) {}

RangeResponse HttpRangeClient::get_range(const std::string& url, std::uint64_t first, std::uint64_t last) {
  const ParsedUrl parts = split_url(url);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Headers headers = {
      {"Range", "bytes=" + std::to_string(first) + "-" + std::to_string(last)}};
  RangeResponse out;
  auto res = client.Get(parts.path, headers);
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = std::move(res->body);
  if (res->has_header("Content-Range")) out.content_range = res->get_header_value("Content-Range");
  return out;
}

std::string fetch_range(RangeClient& client, const std::string& url, std::uint64_t start,
                        std::uint64_t length, const RetryPolicy& policy) {
  if (length == 0) throw ConfigError("fetch_range: length must be positive");
  const std::uint64_t last = start + length - 1;
  auto backoff = policy.initial_backoff;
  std::string last_error;
  const int attempts = std::max(1, policy.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    RangeResponse res = client.get_range(url, start, last);
    if (res.status == 206) {
      if (res.body.size() != length)
        throw NetworkError("range reply for " + url + " carried " + std::to_string(res.body.size()) +
                           " bytes, expected " + std::to_string(length));
      return std::move(res.body);
    }
    if (res.status == 200)
      throw RangeUnsupportedError("server ignored the byte range for " + url + " (status 200)");
    if (!transient(res.status))
      throw NetworkError("GET " + url + " failed with status " + std::to_string(res.status));
    last_error = res.status == 0 ? res.error : "status " + std::to_string(res.status);
    if (attempt == attempts) break;
    if (policy.sleep)
      policy.sleep(backoff);
    else
      std::this_thread::sleep_for(backoff);
    backoff = std::min(policy.max_backoff, backoff * 2);
  }
  throw NetworkError("GET " + url + " failed after " + std::to_string(attempts) +
                     " attempts: " + last_error);
}

std::vector<RangeTriple> read_triples(std::istream& in) {
  std::vector<RangeTriple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw FormatError("expected url<TAB>offset<TAB>length", lineno);
    RangeTriple t;
    t.url = line.substr(0, t1);
    auto parse = [&](std::string_view s, std::uint64_t& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) throw FormatError("bad number '" + std::string(s) + "'", lineno);
    };
    parse(std::string_view(line).substr(t1 + 1, t2 - t1 - 1), t.offset);
    parse(std::string_view(line).substr(t2 + 1), t.length);
    if (t.url.empty() || t.length == 0) throw FormatError("empty url or zero length", lineno);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<FetchOutcome> fetch_all(const std::function<std::unique_ptr<RangeClient>()>& make_client,
                                    const std::vector<RangeTriple>& triples, std::size_t max_connections,
                                    const RetryPolicy& policy) {
  std::vector<FetchOutcome> out(triples.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::clamp<std::size_t>(max_connections, 1, std::max<std::size_t>(1, triples.size()));
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      auto client = make_client();
      for (std::size_t i = next++; i < triples.size(); i = next++) {
        const auto& t = triples[i];
        try {
          out[i].bytes = fetch_range(*client, t.url, t.offset, t.length, policy);
        } catch (const std::exception& e) {
          out[i].error = e.what();
        }
      }
    });
  }
  pool.clear();
  return out;
}

}  // namespace textmill::warc
