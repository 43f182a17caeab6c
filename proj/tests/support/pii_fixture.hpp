#pragma once

// Seeded synthetic corpus with planted PII and planted numbers that must survive.

#include <random>
#include <string>
#include <vector>

namespace textmill::testing {

struct PlantedPii {
  std::string kind;  // EMAIL, USER, IP_ADDRESS, KEY
  std::string value;
};

struct PiiExample {
  std::string text;
  std::vector<PlantedPii> planted;
  std::vector<std::string> keep;  // years and simple numbers
};

class PiiGenerator {
 public:
  explicit PiiGenerator(std::uint32_t seed) : rng_(seed) {}

  std::string pick(const std::vector<std::string>& v) { return v[rng_() % v.size()]; }
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::string alnum(int n, const std::string& alphabet = "abcdefghijklmnopqrstuvwxyz0123456789") {
    std::string s;
    for (int i = 0; i < n; ++i) s += alphabet[rng_() % alphabet.size()];
    return s;
  }

  PlantedPii email() {
    return {"EMAIL", alnum(uniform(1, 6), "abcdefghij") + pick({".", "_", "+", ""}) + alnum(uniform(1, 5)) + "@" +
                         alnum(uniform(2, 8), "abcdefghijklmnop") + pick({".com", ".org", ".co.uk", ".io", ".fr"})};
  }
  PlantedPii user() {
    return {"USER", "@" + alnum(1, "abcdefghijklmnopqrstuvwxyz") + alnum(uniform(1, 12), "abcdefghijklmnopqrstuvwxyz0123456789_")};
  }
  PlantedPii ipv4() {
    return {"IP_ADDRESS", std::to_string(uniform(1, 255)) + "." + std::to_string(uniform(0, 255)) + "." +
                              std::to_string(uniform(0, 255)) + "." + std::to_string(uniform(0, 255))};
  }
  PlantedPii ipv6() {
    std::string s;
    const int groups = uniform(2, 7);
    for (int i = 0; i < groups; ++i) {
      if (i) s += ':';
      s += alnum(uniform(1, 4), "0123456789abcdef");
    }
    // Keep at least one letter so the value is clearly not a clock time.
    s += ":" + alnum(3, "abcdef") + "1";
    return {"IP_ADDRESS", s};
  }
  PlantedPii key() {
    switch (uniform(0, 3)) {
      case 0: return {"KEY", alnum(uniform(16, 40), "0123456789abcdef")};
      case 1:
        return {"KEY", std::to_string(uniform(200, 999)) + "-" + std::to_string(uniform(100, 999)) + "-" +
                           std::to_string(uniform(1000, 9999))};
      case 2: return {"KEY", alnum(uniform(7, 12), "0123456789")};
      default: {
        std::string s = alnum(4, "ABCDEFGHJKLMNPQRSTUVWXYZ") + alnum(4, "0123456789") + alnum(uniform(0, 4), "ABCDEFXYZ");
        std::shuffle(s.begin(), s.end(), rng_);
        if (s[0] >= '0' && s[0] <= '9') s = "K" + s;
        return {"KEY", s};
      }
    }
  }
  std::string keeper() {
    if (uniform(0, 1)) return std::to_string(uniform(1000, 2999));
    return std::to_string(uniform(0, 9999 / (uniform(0, 1) ? 1 : 100)));
  }

  PiiExample example(PlantedPii p, bool with_keeper) {
    static const std::vector<std::string> lead = {"Contact", "Reach", "Note that", "Reported by", "See", "Ping"};
    static const std::vector<std::string> tail = {"for details.", "today.", "again", "if needed", "- thanks"};
    PiiExample e;
    e.text = pick(lead) + " " + p.value + " " + pick(tail);
    if (with_keeper) {
      const std::string year = keeper();
      const std::string count = std::to_string(uniform(1, 99));
      e.text += " In " + year + " we had " + count + " items.";
      e.keep = {year, count};
    }
    e.planted.push_back(std::move(p));
    return e;
  }

  /// `n_pii` planted instances spread over the four classes, the first
  /// `n_keep_docs` examples carrying two numbers each that must not change.
  std::vector<PiiExample> corpus(int n_pii, int n_keep_docs) {
    std::vector<PiiExample> out;
    for (int i = 0; i < n_pii; ++i) {
      PlantedPii p;
      switch (i % 5) {
        case 0: p = email(); break;
        case 1: p = user(); break;
        case 2: p = ipv4(); break;
        case 3: p = uniform(0, 1) ? ipv6() : ipv4(); break;
        default: p = key(); break;
      }
      out.push_back(example(std::move(p), i < n_keep_docs));
    }
    return out;
  }

 private:
  std::mt19937 rng_;
};

}  // namespace textmill::testing
