#include <algorithm>
#include <map>
#include <random>

#include "textmill/dedup.hpp"
#include "textmill/errors.hpp"
#include "textmill/parallel.hpp"
#include "textmill/unicode.hpp"

namespace textmill::dedup {

namespace {

__extension__ typedef unsigned __int128 u128;

std::uint64_t mod_mersenne61(u128 x) {
  constexpr std::uint64_t p = MinHasher::kPrime;
  std::uint64_t r = static_cast<std::uint64_t>(x & p) + static_cast<std::uint64_t>(x >> 61);
  r = (r & p) + (r >> 61);
  return r >= p ? r - p : r;
}

}  // namespace

std::vector<std::uint64_t> shingles(std::string_view text, std::size_t n) {
  if (n == 0) throw ConfigError("shingle size must be at least 1");
  const auto tokens = unicode::split_whitespace(text);
  std::vector<std::uint64_t> out;
  if (tokens.empty()) return out;
  const std::size_t width = std::min(n, tokens.size());
  std::string joined;
  for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
    joined.assign(tokens[i]);
    for (std::size_t j = 1; j < width; ++j) {
      joined.push_back(' ');
      joined.append(tokens[i + j]);
    }
    out.push_back(hash_bytes(joined));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

MinHasher::MinHasher(std::size_t perms, std::uint64_t seed) {
  if (perms == 0) throw ConfigError("minhash_perms must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> a_dist(1, kPrime - 1);
  std::uniform_int_distribution<std::uint64_t> b_dist(0, kPrime - 1);
  a_.resize(perms);
  b_.resize(perms);
  for (std::size_t i = 0; i < perms; ++i) {
    a_[i] = a_dist(rng);
    b_[i] = b_dist(rng);
  }
}

MinHashSig MinHasher::signature(std::span<const std::uint64_t> shingle_set) const {
  if (shingle_set.empty()) return {};
  MinHashSig sig(a_.size(), kPrime);
  for (std::uint64_t raw : shingle_set) {
    const std::uint64_t x = mod_mersenne61(raw);
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const std::uint64_t h = mod_mersenne61(static_cast<u128>(a_[i]) * x + b_[i]);
      if (h < sig[i]) sig[i] = h;
    }
  }
  return sig;
}

double estimate_jaccard(const MinHashSig& a, const MinHashSig& b) {
  if (a.empty() || b.empty() || a.size() != b.size()) return 0.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

double jaccard(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<Pair> lsh_pairs(std::span<const MinHashSig> sigs, std::size_t bands, std::size_t rows) {
  if (bands == 0 || rows == 0) throw ConfigError("bands and rows must be positive");
  for (const auto& s : sigs) {
    if (!s.empty() && s.size() != bands * rows) throw ConfigError("signature length differs from bands * rows");
  }
  auto band_equal = [&](std::size_t x, std::size_t y, std::size_t band) {
    return std::equal(sigs[x].begin() + static_cast<std::ptrdiff_t>(band * rows),
                      sigs[x].begin() + static_cast<std::ptrdiff_t>((band + 1) * rows),
                      sigs[y].begin() + static_cast<std::ptrdiff_t>(band * rows));
  };
  std::vector<Pair> pairs;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    if (!sigs[i].empty()) order.push_back(i);
  }
  for (std::size_t band = 0; band < bands; ++band) {
    const auto off = static_cast<std::ptrdiff_t>(band * rows);
    const auto len = static_cast<std::ptrdiff_t>(rows);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      const auto& a = sigs[x];
      const auto& b = sigs[y];
      const bool lt = std::lexicographical_compare(a.begin() + off, a.begin() + off + len, b.begin() + off,
                                                   b.begin() + off + len);
      if (lt) return true;
      const bool gt = std::lexicographical_compare(b.begin() + off, b.begin() + off + len, a.begin() + off,
                                                   a.begin() + off + len);
      return !gt && x < y;
    });
    for (std::size_t start = 0; start < order.size();) {
      std::size_t end = start + 1;
      while (end < order.size() && band_equal(order[start], order[end], band)) ++end;
      for (std::size_t i = start; i < end; ++i) {
        for (std::size_t j = i + 1; j < end; ++j) {
          const std::size_t x = order[i];
          const std::size_t y = order[j];
          bool earlier = false;
          for (std::size_t e = 0; e < band && !earlier; ++e) earlier = band_equal(x, y, e);
          if (!earlier) pairs.emplace_back(x, y);
        }
      }
      start = end;
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<Pair> verify_jaccard(std::span<const Pair> pairs, std::span<const std::vector<std::uint64_t>> sets,
                                 double jaccard_min) {
  std::vector<Pair> out;
  for (const auto& p : pairs) {
    if (jaccard(sets[p.first], sets[p.second]) >= jaccard_min) out.push_back(p);
  }
  return out;
}

ClusterResult minhash_dedup(std::span<const Document> docs, const DedupConfig& config, std::size_t threads) {
  config.validate();
  const MinHasher hasher(config.minhash_perms, config.seed);
  std::vector<std::vector<std::uint64_t>> sets(docs.size());
  std::vector<MinHashSig> sigs(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) {
    sets[i] = shingles(docs[i].text, config.shingle_n);
    sigs[i] = hasher.signature(sets[i]);
  });
  const auto candidates = lsh_pairs(sigs, config.lsh_bands, config.lsh_rows);
  const auto verified = verify_jaccard(candidates, sets, config.jaccard_min);
  ClusterResult result;
  result.clusters = cluster_pairs(docs.size(), verified);
  result.removed = keep_first(result.clusters, [](std::size_t) { return false; });
  return result;
}

}  // namespace textmill::dedup
