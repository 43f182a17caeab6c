#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "textmill/document.hpp"

namespace textmill::dedup {

struct DedupConfig {
  std::size_t simhash_n = 6;
  int hamming_max = 4;
  std::size_t long_doc_chars = 6000;
  std::size_t substring_min_len = 100;
  std::size_t minhash_perms = 256;
  std::size_t lsh_bands = 16;
  std::size_t lsh_rows = 16;
  double jaccard_min = 0.85;
  std::size_t shingle_n = 5;
  std::uint64_t seed = 0x7465787432303232ULL;

  /// Throws ConfigError when b*r != k, hamming_max is outside [0,63], etc.
  void validate() const;
};

using Pair = std::pair<std::size_t, std::size_t>;  // first < second

class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t x);
  void unite(std::size_t a, std::size_t b);
  /// Components with at least `min_size` members; members ascending, clusters
  /// ordered by their smallest member.
  std::vector<std::vector<std::size_t>> clusters(std::size_t min_size = 2);

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

std::vector<std::vector<std::size_t>> cluster_pairs(std::size_t n, std::span<const Pair> pairs);

struct ClusterResult {
  std::vector<std::vector<std::size_t>> clusters;  // indices, size >= 2
  std::vector<std::size_t> removed;                // ascending indices
};

/// Keep-first removal; `exempt(i)` protects a member from removal.
template <typename Exempt>
std::vector<std::size_t> keep_first(const std::vector<std::vector<std::size_t>>& clusters, Exempt&& exempt);

// ---- SimHash -------------------------------------------------------------

using SimHash = std::uint64_t;

/// FNV-1a over the bytes followed by a 64-bit avalanche finalizer.
std::uint64_t hash_bytes(std::string_view bytes) noexcept;

/// Collapses Unicode whitespace runs to one space and trims.
std::string normalize_whitespace(std::string_view text);

/// Count-weighted bit vote over character n-grams of the whitespace-normalized
/// text. Text shorter than n characters is a single feature; empty text is 0.
SimHash simhash(std::string_view text, std::size_t n = 6);

inline int hamming(SimHash a, SimHash b) noexcept { return __builtin_popcountll(a ^ b); }

/// Bit ranges [begin, end) of the d+1 pigeonhole blocks, larger blocks first.
std::vector<std::pair<int, int>> pigeonhole_blocks(int hamming_max);

/// All index pairs at Hamming distance <= hamming_max, found through exact
/// block matches and verified. Sorted.
std::vector<Pair> simhash_pairs(std::span<const SimHash> sigs, int hamming_max = 4);

/// SimHash clusters over all documents; documents longer than long_doc_chars
/// are never removed.
ClusterResult find_near_dups(std::span<const Document> docs, const DedupConfig& config, std::size_t threads = 1);

// ---- Suffix array --------------------------------------------------------

/// SA-IS over symbols in [0, upper].
std::vector<std::int32_t> suffix_array(std::span<const std::int32_t> s, std::int32_t upper);
std::vector<std::int32_t> suffix_array(std::string_view bytes);
/// Kasai: lcp[i] = LCP(suffix sa[i-1], suffix sa[i]); lcp[0] = 0.
std::vector<std::int32_t> lcp_array(std::span<const std::int32_t> s, std::span<const std::int32_t> sa);
std::vector<std::int32_t> lcp_array(std::string_view bytes, std::span<const std::int32_t> sa);

/// Concatenation of documents, each followed by its own sentinel symbol
/// (256 + document index), so no common prefix can cross a boundary.
struct CorpusSuffixArray {
  std::vector<std::int32_t> text;
  std::vector<std::int32_t> sa;
  std::vector<std::int32_t> lcp;
  std::vector<std::int32_t> doc_of;  // position -> document index

  static CorpusSuffixArray build(std::span<const std::string_view> docs);
};

/// Documents linked when they share a byte substring of length >= min_len.
std::vector<std::vector<std::size_t>> substring_clusters(std::span<const std::string_view> docs, std::size_t min_len);

/// Substring clustering restricted to documents longer than long_doc_chars;
/// keep-first removal. Indices refer to `docs`.
ClusterResult substring_dedup(std::span<const Document> docs, const DedupConfig& config);

// ---- MinHash -------------------------------------------------------------

using MinHashSig = std::vector<std::uint64_t>;  // empty for empty shingle sets

/// Sorted, unique 64-bit hashes of whitespace-token n-grams. Fewer than n
/// tokens gives a single shingle of all tokens.
std::vector<std::uint64_t> shingles(std::string_view text, std::size_t n = 5);

class MinHasher {
 public:
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  MinHasher(std::size_t perms, std::uint64_t seed);
  MinHashSig signature(std::span<const std::uint64_t> shingle_set) const;
  std::size_t perms() const noexcept { return a_.size(); }

 private:
  std::vector<std::uint64_t> a_;
  std::vector<std::uint64_t> b_;
};

double estimate_jaccard(const MinHashSig& a, const MinHashSig& b);
/// Exact Jaccard of two sorted unique sets; 0 when both are empty.
double jaccard(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

/// Pairs agreeing on every row of at least one band. Sorted.
std::vector<Pair> lsh_pairs(std::span<const MinHashSig> sigs, std::size_t bands, std::size_t rows);
std::vector<Pair> verify_jaccard(std::span<const Pair> pairs, std::span<const std::vector<std::uint64_t>> sets,
                                 double jaccard_min);

ClusterResult minhash_dedup(std::span<const Document> docs, const DedupConfig& config, std::size_t threads = 1);

/// One line per cluster: tab-separated document ids, retained id first.
void write_cluster_report(std::ostream& out, std::span<const Document> docs, const ClusterResult& result);

template <typename Exempt>
std::vector<std::size_t> keep_first(const std::vector<std::vector<std::size_t>>& clusters, Exempt&& exempt) {
  std::vector<std::size_t> removed;
  for (const auto& c : clusters) {
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (!exempt(c[i])) removed.push_back(c[i]);
    }
  }
  std::sort(removed.begin(), removed.end());
  return removed;
}

}  // namespace textmill::dedup
