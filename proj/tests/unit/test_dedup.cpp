#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "textmill/dedup.hpp"

using namespace textmill;
using namespace textmill::dedup;
using textmill::testing::longest_common_substring;
using textmill::testing::naive_components;
using textmill::testing::naive_lcp;
using textmill::testing::naive_suffix_array;

namespace {

std::string random_words(std::mt19937& rng, int n) {
  static const char* syll[] = {"ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "ze", "pa", "qu", "di"};
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    const int len = 1 + static_cast<int>(rng() % 3);
    for (int j = 0; j < len; ++j) out += syll[rng() % 12];
  }
  return out;
}

std::string random_string(std::mt19937& rng, std::size_t len, int alphabet) {
  std::string s(len, 'a');
  for (auto& c : s) c = static_cast<char>('a' + rng() % alphabet);
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> all_pairs_within(std::span<const SimHash> sigs, int d) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < sigs.size(); ++i)
    for (std::size_t j = i + 1; j < sigs.size(); ++j)
      if (__builtin_popcountll(sigs[i] ^ sigs[j]) <= d) out.emplace_back(i, j);
  return out;
}

}  // namespace

TEST_CASE("hamming") {
  CHECK(hamming(0b0000, 0b1011) == 3);
  CHECK(hamming(0xdeadbeef, 0xdeadbeef) == 0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto a = rng(), b = rng();
    CHECK(hamming(a, b) == hamming(b, a));
  }
}

TEST_CASE("simhash basics") {
  CHECK(simhash("") == 0);
  CHECK(simhash("some text here") == simhash("some text here"));
  CHECK(hamming(simhash("x"), simhash("x")) == 0);
  CHECK(simhash("a  b\n c") == simhash("a b c"));
  CHECK(normalize_whitespace("  a \t b  ") == "a b");
}

TEST_CASE("simhash: edited copies are closer than unrelated documents") {
  std::mt19937 rng(100);
  double edited = 0, unrelated = 0;
  std::vector<std::string> docs;
  for (int i = 0; i < 100; ++i) docs.push_back(random_words(rng, 200));
  for (int i = 0; i < 100; ++i) {
    std::string copy = docs[i];
    const auto sp = copy.find(' ', copy.size() / 2);
    copy.insert(sp, " edit");
    edited += hamming(simhash(docs[i]), simhash(copy));
    unrelated += hamming(simhash(docs[i]), simhash(docs[(i + 1) % 100]));
  }
  MESSAGE("mean edited=", edited / 100, " mean unrelated=", unrelated / 100);
  CHECK(edited / 100 < unrelated / 100);
}

TEST_CASE("pigeonhole blocks") {
  auto b = pigeonhole_blocks(4);
  REQUIRE(b.size() == 5);
  const std::vector<int> widths = {13, 13, 13, 13, 12};
  for (std::size_t i = 0; i < 5; ++i) CHECK(b[i].second - b[i].first == widths[i]);
  CHECK(b.front().first == 0);
  CHECK(b.back().second == 64);
  CHECK_THROWS_AS(pigeonhole_blocks(64), ConfigError);

  // Any <= 4 flips leave at least one block untouched.
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t x = rng();
    std::uint64_t y = x;
    const int flips = static_cast<int>(rng() % 5);
    for (int f = 0; f < flips; ++f) y ^= std::uint64_t{1} << (rng() % 64);
    bool any_equal = false;
    for (auto [lo, hi] : b) {
      const std::uint64_t mask = (hi - lo == 64 ? ~0ULL : ((std::uint64_t{1} << (hi - lo)) - 1)) << lo;
      any_equal |= (x & mask) == (y & mask);
    }
    CHECK(any_equal);
  }
}

TEST_CASE("simhash_pairs equals the all-pairs set") {
  std::mt19937_64 rng(42);
  std::vector<SimHash> sigs;
  for (int i = 0; i < 1500; ++i) {
    if (i > 0 && rng() % 3 == 0) {
      SimHash s = sigs[rng() % sigs.size()];
      const int flips = static_cast<int>(rng() % 7);
      for (int f = 0; f < flips; ++f) s ^= std::uint64_t{1} << (rng() % 64);
      sigs.push_back(s);
    } else {
      sigs.push_back(rng());
    }
  }
  for (int d : {0, 2, 4, 6}) {
    auto got = simhash_pairs(sigs, d);
    auto want = all_pairs_within(sigs, d);
    CHECK(got.size() == want.size());
    CHECK(got == want);
  }
}

TEST_CASE("find_near_dups") {
  Dataset docs = {{"a", "the same document text", Meta::object()},
                  {"b", "the same document text", Meta::object()},
                  {"c", "something else entirely different here", Meta::object()}};
  DedupConfig cfg;
  auto r = find_near_dups(docs, cfg);
  REQUIRE(r.clusters.size() == 1);
  CHECK(r.clusters[0] == std::vector<std::size_t>{0, 1});
  CHECK(r.removed == std::vector<std::size_t>{1});

  const std::string long_text(7000, 'q');
  Dataset longs = {{"x", long_text, Meta::object()}, {"y", long_text, Meta::object()}};
  auto rl = find_near_dups(longs, cfg);
  CHECK(rl.clusters.size() == 1);
  CHECK(rl.removed.empty());

  std::ostringstream report;
  write_cluster_report(report, docs, r);
  CHECK(report.str() == "a\tb\n");

  CHECK(find_near_dups(docs, cfg, 4).removed == r.removed);
}

TEST_CASE("suffix array fixtures") {
  CHECK(suffix_array("banana") == std::vector<std::int32_t>{5, 3, 1, 0, 4, 2});
  CHECK(suffix_array("").empty());
  const auto sa = suffix_array("aaa");
  CHECK(sa == std::vector<std::int32_t>{2, 1, 0});
  const auto lcp = lcp_array("aaa", sa);
  CHECK(lcp[1] == 1);
  CHECK(lcp[2] == 2);
}

TEST_CASE("suffix array and lcp against brute force") {
  std::mt19937 rng(17);
  for (int i = 0; i < 300; ++i) {
    const std::string s = random_string(rng, rng() % 200, 1 + static_cast<int>(rng() % 4));
    const auto sa = suffix_array(s);
    REQUIRE(sa == naive_suffix_array(s));
    const auto lcp = lcp_array(s, sa);
    for (std::size_t k = 1; k < sa.size(); ++k)
      CHECK(lcp[k] == naive_lcp(std::string_view(s).substr(sa[k - 1]), std::string_view(s).substr(sa[k])));
  }
}

TEST_CASE("corpus suffix array never matches across documents") {
  const std::vector<std::string_view> docs = {"abab", "ab", "ba"};
  auto c = CorpusSuffixArray::build(docs);
  CHECK(c.text.size() == 4 + 1 + 2 + 1 + 2 + 1);
  for (std::size_t i = 1; i < c.sa.size(); ++i) {
    const auto a = c.sa[i - 1], b = c.sa[i];
    // The common prefix must stay inside each suffix's own document.
    std::int32_t k = 0;
    while (a + k < static_cast<std::int32_t>(c.text.size()) && b + k < static_cast<std::int32_t>(c.text.size()) &&
           c.text[a + k] == c.text[b + k])
      ++k;
    CHECK(c.lcp[i] == k);
    for (std::int32_t j = 0; j < k; ++j) CHECK(c.text[a + j] < 256);
  }
}

TEST_CASE("substring clusters") {
  std::mt19937 rng(5);
  const std::string shared = random_string(rng, 120, 26);
  const std::string a = random_string(rng, 50, 26) + shared + random_string(rng, 30, 26);
  const std::string b = random_string(rng, 10, 26) + shared;
  const std::string c = random_string(rng, 200, 26);
  std::vector<std::string_view> docs = {a, b, c};
  auto cl = substring_clusters(docs, 100);
  REQUIRE(cl.size() == 1);
  CHECK(cl[0] == std::vector<std::size_t>{0, 1});

  const std::string s99 = shared.substr(0, 99);
  const std::string a2 = "X" + s99 + "Y";
  const std::string b2 = "Z" + s99 + "W";
  std::vector<std::string_view> docs2 = {a2, b2};
  CHECK(substring_clusters(docs2, 100).empty());
  CHECK(substring_clusters(docs2, 99).size() == 1);
}

TEST_CASE("substring clusters match the quadratic oracle") {
  std::mt19937 rng(23);
  for (int iter = 0; iter < 20; ++iter) {
    const std::size_t min_len = iter % 2 ? 20 : 40;
    std::vector<std::string> pool;
    for (int i = 0; i < 5; ++i) pool.push_back(random_string(rng, 60, 4));
    std::vector<std::string> texts;
    for (int i = 0; i < 15; ++i) {
      std::string t = random_string(rng, 40 + rng() % 60, 4);
      if (rng() % 2) {
        const auto& p = pool[rng() % pool.size()];
        const std::size_t len = 10 + rng() % 50;
        t.insert(rng() % (t.size() + 1), p.substr(0, len));
      }
      texts.push_back(t);
    }
    std::vector<std::string_view> views(texts.begin(), texts.end());
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < texts.size(); ++i)
      for (std::size_t j = i + 1; j < texts.size(); ++j)
        if (longest_common_substring(texts[i], texts[j]) >= min_len) edges.emplace_back(i, j);
    CHECK(substring_clusters(views, min_len) == naive_components(texts.size(), edges));
  }
}

TEST_CASE("substring_dedup only considers long documents") {
  const std::string shared(150, 'z');
  std::string long_a = std::string(6001, 'a') + shared;
  std::string long_b = std::string(6001, 'b') + shared;
  Dataset docs = {{"s1", shared, Meta::object()}, {"l1", long_a, Meta::object()}, {"s2", shared, Meta::object()},
                  {"l2", long_b, Meta::object()}};
  DedupConfig cfg;
  auto r = substring_dedup(docs, cfg);
  REQUIRE(r.clusters.size() == 1);
  CHECK(r.clusters[0] == std::vector<std::size_t>{1, 3});
  CHECK(r.removed == std::vector<std::size_t>{3});
}

TEST_CASE("minhash estimates") {
  MinHasher h(256, 7);
  const std::vector<std::uint64_t> s1 = {11, 22, 33};
  CHECK(estimate_jaccard(h.signature(s1), h.signature(s1)) == 1.0);
  CHECK(h.signature({}).empty());

  std::vector<std::uint64_t> d1, d2;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    d1.push_back(i * 2);
    d2.push_back(i * 2 + 1);
  }
  CHECK(estimate_jaccard(h.signature(d1), h.signature(d2)) <= 0.05);

  const std::vector<std::uint64_t> abc = {1, 2, 3}, bcd = {2, 3, 4};
  CHECK(jaccard(abc, bcd) == 0.5);
  CHECK(std::abs(estimate_jaccard(h.signature(abc), h.signature(bcd)) - 0.5) <= 0.1);
}

TEST_CASE("minhash is unbiased within three standard errors") {
  std::mt19937_64 rng(2);
  MinHasher h(256, 99);
  int outside = 0;
  for (int i = 0; i < 100; ++i) {
    std::set<std::uint64_t> a, b;
    const int common = 1 + static_cast<int>(rng() % 200), only_a = static_cast<int>(rng() % 200),
              only_b = static_cast<int>(rng() % 200);
    for (int k = 0; k < common; ++k) {
      const auto x = rng();
      a.insert(x);
      b.insert(x);
    }
    for (int k = 0; k < only_a; ++k) a.insert(rng());
    for (int k = 0; k < only_b; ++k) b.insert(rng());
    const std::vector<std::uint64_t> va(a.begin(), a.end()), vb(b.begin(), b.end());
    const double j = textmill::testing::set_jaccard(a, b);
    const double est = estimate_jaccard(h.signature(va), h.signature(vb));
    if (std::abs(est - j) > 3 * std::sqrt(j * (1 - j) / 256) + 1e-12) ++outside;
  }
  MESSAGE("pairs outside 3 sigma: ", outside);
  CHECK(outside <= 2);
}

TEST_CASE("lsh banding") {
  const MinHashSig a(256, 5);
  MinHashSig b = a;
  MinHashSig c(256, 0);
  for (std::size_t i = 0; i < 256; i += 16) c[i] = 99;  // one differing row per band
  for (std::size_t i = 0; i < 256; ++i)
    if (i % 16) c[i] = a[i];
  std::vector<MinHashSig> sigs = {a, b, c};
  auto p = lsh_pairs(sigs, 16, 16);
  CHECK(p == std::vector<Pair>{{0, 1}});
  std::vector<std::vector<std::uint64_t>> sets = {{1, 2, 3, 4}, {1, 2, 3, 5}, {9}};
  // J({1,2,3,4}, {1,2,3,5}) = 3/5; the threshold is inclusive.
  CHECK(verify_jaccard(p, sets, 0.61).empty());
  CHECK(verify_jaccard(p, sets, 0.6) == std::vector<Pair>{{0, 1}});
}

TEST_CASE("shingles") {
  auto s = shingles("a b c d e f", 5);
  CHECK(s.size() == 2);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(shingles("a b", 5).size() == 1);
  CHECK(shingles("", 5).empty());
  CHECK(shingles("x y z x y z x y z", 3).size() == 3);
}

TEST_CASE("minhash_dedup on planted duplicates") {
  std::mt19937 rng(4);
  Dataset docs;
  for (int i = 0; i < 40; ++i) docs.push_back({std::to_string(i), random_words(rng, 80), Meta::object()});
  docs.push_back({"dup", docs[3].text, Meta::object()});
  DedupConfig cfg;
  auto r = minhash_dedup(docs, cfg);
  REQUIRE(r.clusters.size() == 1);
  CHECK(r.clusters[0] == std::vector<std::size_t>{3, 40});
  CHECK(r.removed == std::vector<std::size_t>{40});
  CHECK(minhash_dedup(docs, cfg, 3).removed == r.removed);
}

TEST_CASE("clustering is independent of pair order") {
  std::mt19937 rng(12);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<Pair> pairs;
    for (int k = 0; k < 30; ++k) {
      std::size_t a = rng() % 50, b = rng() % 50;
      if (a == b) continue;
      pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
    auto base = cluster_pairs(50, pairs);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    CHECK(cluster_pairs(50, pairs) == base);
    std::vector<std::pair<std::size_t, std::size_t>> edges(pairs.begin(), pairs.end());
    CHECK(base == naive_components(50, edges));
  }
}

TEST_CASE("config validation") {
  DedupConfig ok;
  CHECK_NOTHROW(ok.validate());
  DedupConfig bad = ok;
  bad.lsh_bands = 8;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.hamming_max = 64;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.long_doc_chars = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
