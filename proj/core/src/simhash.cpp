#include <algorithm>
#include <array>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "textmill/dedup.hpp"
#include "textmill/errors.hpp"
#include "textmill/parallel.hpp"
#include "textmill/unicode.hpp"

namespace textmill::dedup {

void DedupConfig::validate() const {
  if (simhash_n == 0) throw ConfigError("simhash_n must be at least 1");
  if (hamming_max < 0 || hamming_max >= 64) throw ConfigError("hamming_max must be in [0, 63]");
  if (long_doc_chars == 0) throw ConfigError("long_doc_chars must be positive");
  if (substring_min_len == 0) throw ConfigError("substring_min_len must be positive");
  if (lsh_bands == 0 || lsh_rows == 0) throw ConfigError("lsh_bands and lsh_rows must be positive");
  if (lsh_bands * lsh_rows != minhash_perms)
    throw ConfigError("lsh_bands * lsh_rows must equal minhash_perms (" + std::to_string(lsh_bands) + " * " +
                      std::to_string(lsh_rows) + " != " + std::to_string(minhash_perms) + ")");
  if (!(jaccard_min >= 0.0 && jaccard_min <= 1.0)) throw ConfigError("jaccard_min must be in [0, 1]");
  if (shingle_n == 0) throw ConfigError("shingle_n must be at least 1");
}

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

void UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
}

std::vector<std::vector<std::size_t>> UnionFind::clusters(std::size_t min_size) {
  std::unordered_map<std::size_t, std::size_t> slot;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < parent_.size(); ++i) {
    const std::size_t root = find(i);
    auto [it, inserted] = slot.emplace(root, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  // Members are pushed in ascending order and groups are created in order of
  // their smallest member.
  std::vector<std::vector<std::size_t>> out;
  for (auto& g : groups) {
    if (g.size() >= min_size) out.push_back(std::move(g));
  }
  return out;
}

std::vector<std::vector<std::size_t>> cluster_pairs(std::size_t n, std::span<const Pair> pairs) {
  UnionFind uf(n);
  for (const auto& [a, b] : pairs) uf.unite(a, b);
  return uf.clusters();
}

std::uint64_t hash_bytes(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (auto tok : unicode::split_whitespace(text)) {
    if (!out.empty()) out.push_back(' ');
    out.append(tok);
  }
  return out;
}

SimHash simhash(std::string_view text, std::size_t n) {
  const std::string norm = normalize_whitespace(text);
  if (norm.empty()) return 0;
  // Byte offsets of every code point, plus the end.
  std::vector<std::size_t> starts;
  starts.reserve(norm.size() + 1);
  std::size_t pos = 0;
  while (pos < norm.size()) {
    starts.push_back(pos);
    unicode::next_code_point(norm, pos);
  }
  starts.push_back(norm.size());
  const std::size_t chars = starts.size() - 1;

  std::array<std::int64_t, 64> acc{};
  auto vote = [&](std::uint64_t h) {
    for (int bit = 0; bit < 64; ++bit) acc[static_cast<std::size_t>(bit)] += ((h >> bit) & 1U) ? 1 : -1;
  };
  if (chars < n) {
    vote(hash_bytes(norm));
  } else {
    for (std::size_t i = 0; i + n <= chars; ++i) {
      vote(hash_bytes(std::string_view(norm).substr(starts[i], starts[i + n] - starts[i])));
    }
  }
  SimHash sig = 0;
  for (int bit = 0; bit < 64; ++bit) {
    if (acc[static_cast<std::size_t>(bit)] > 0) sig |= (std::uint64_t{1} << bit);
  }
  return sig;
}

std::vector<std::pair<int, int>> pigeonhole_blocks(int hamming_max) {
  if (hamming_max < 0 || hamming_max >= 64) throw ConfigError("hamming_max must be in [0, 63]");
  const int blocks = hamming_max + 1;
  const int base = 64 / blocks;
  const int extra = 64 % blocks;
  std::vector<std::pair<int, int>> out;
  int begin = 0;
  for (int b = 0; b < blocks; ++b) {
    const int width = base + (b < extra ? 1 : 0);
    out.emplace_back(begin, begin + width);
    begin += width;
  }
  return out;
}

namespace {

std::uint64_t block_value(SimHash sig, std::pair<int, int> range) {
  const int width = range.second - range.first;
  const std::uint64_t mask = width >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1);
  return (sig >> range.first) & mask;
}

}  // namespace

std::vector<Pair> simhash_pairs(std::span<const SimHash> sigs, int hamming_max) {
  const auto blocks = pigeonhole_blocks(hamming_max);
  std::vector<Pair> pairs;
  std::vector<std::size_t> order(sigs.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::uint64_t> key(sigs.size());
    for (std::size_t i = 0; i < sigs.size(); ++i) key[i] = block_value(sigs[i], blocks[b]);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return key[x] != key[y] ? key[x] < key[y] : x < y;
    });
    for (std::size_t start = 0; start < order.size();) {
      std::size_t end = start + 1;
      while (end < order.size() && key[order[end]] == key[order[start]]) ++end;
      for (std::size_t i = start; i < end; ++i) {
        for (std::size_t j = i + 1; j < end; ++j) {
          const std::size_t x = order[i];
          const std::size_t y = order[j];
          // Report each pair only at its first matching block.
          bool earlier = false;
          for (std::size_t e = 0; e < b && !earlier; ++e)
            earlier = block_value(sigs[x], blocks[e]) == block_value(sigs[y], blocks[e]);
          if (!earlier && hamming(sigs[x], sigs[y]) <= hamming_max) pairs.emplace_back(x, y);
        }
      }
      start = end;
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

ClusterResult find_near_dups(std::span<const Document> docs, const DedupConfig& config, std::size_t threads) {
  config.validate();
  std::vector<SimHash> sigs(docs.size());
  std::vector<bool> long_doc(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) { sigs[i] = simhash(docs[i].text, config.simhash_n); });
  for (std::size_t i = 0; i < docs.size(); ++i) long_doc[i] = unicode::length(docs[i].text) > config.long_doc_chars;
  const auto pairs = simhash_pairs(sigs, config.hamming_max);
  ClusterResult result;
  result.clusters = cluster_pairs(docs.size(), pairs);
  result.removed = keep_first(result.clusters, [&](std::size_t i) { return static_cast<bool>(long_doc[i]); });
  return result;
}

void write_cluster_report(std::ostream& out, std::span<const Document> docs, const ClusterResult& result) {
  for (const auto& c : result.clusters) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) out << '\t';
      out << docs[c[i]].id;
    }
    out << '\n';
  }
}

}  // namespace textmill::dedup
