#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "textmill/errors.hpp"

namespace textmill::warc {

/// Raw reply to a ranged GET.
struct RangeResponse {
  int status = 0;  // 0 means the request never completed (connection failure)
  std::string body;
  std::optional<std::string> content_range;
  std::string error;  // transport error description when status == 0
};

/// Byte-range retrieval contract: issue `GET url` with
/// "Range: bytes=first-last" (inclusive) and report what came back.
class RangeClient {
 public:
  virtual ~RangeClient() = default;
  virtual RangeResponse get_range(const std::string& url, std::uint64_t first, std::uint64_t last) = 0;
};

/// HTTP/1.1 client backed by cpp-httplib. Supports http:// URLs.
class HttpRangeClient final : public RangeClient {
 public:
  explicit HttpRangeClient(std::chrono::milliseconds timeout = std::chrono::seconds(30));
  RangeResponse get_range(const std::string& url, std::uint64_t first, std::uint64_t last) override;

 private:
  std::chrono::milliseconds timeout_;
};

class RangeUnsupportedError : public Error {
 public:
  using Error::Error;
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::milliseconds max_backoff{5000};
  /// Injected for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Returns exactly `length` bytes starting at `start`. Transient failures
/// (transport errors, 408, 429, 5xx) are retried with exponential backoff.
/// A 200 reply means the server ignored the range: RangeUnsupportedError.
std::string fetch_range(RangeClient& client, const std::string& url, std::uint64_t start,
                        std::uint64_t length, const RetryPolicy& policy = {});

/// One line of a triple file: url<TAB>offset<TAB>length.
struct RangeTriple {
  std::string url;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  friend bool operator==(const RangeTriple&, const RangeTriple&) = default;
};

/// Parses a triple file; blank lines and '#' comments are skipped.
std::vector<RangeTriple> read_triples(std::istream& in);

struct FetchOutcome {
  std::optional<std::string> bytes;
  std::string error;  // set when bytes is empty
};

/// Fetches every triple with at most `max_connections` requests in flight.
/// Results are returned in input order. `make_client` is called once per
/// worker so clients need not be thread safe.
std::vector<FetchOutcome> fetch_all(const std::function<std::unique_ptr<RangeClient>()>& make_client,
                                    const std::vector<RangeTriple>& triples, std::size_t max_connections,
                                    const RetryPolicy& policy = {});

}  // namespace textmill::warc
