#include <algorithm>

#include "textmill/dedup.hpp"
#include "textmill/errors.hpp"
#include "textmill/unicode.hpp"

namespace textmill::dedup {

namespace {

using Vec = std::vector<std::int32_t>;

// Induced sorting (Nong, Zhang and Chan), symbols in [0, upper].
Vec sa_is(std::span<const std::int32_t> s, std::int32_t upper) {
  const auto n = static_cast<std::int32_t>(s.size());
  if (n == 0) return {};
  if (n == 1) return {0};
  if (n == 2) return s[0] < s[1] ? Vec{0, 1} : Vec{1, 0};

  Vec sa(static_cast<std::size_t>(n));
  std::vector<bool> ls(static_cast<std::size_t>(n), false);
  for (std::int32_t i = n - 2; i >= 0; --i) ls[i] = s[i] == s[i + 1] ? ls[i + 1] : s[i] < s[i + 1];

  Vec sum_l(static_cast<std::size_t>(upper) + 1, 0);
  Vec sum_s(static_cast<std::size_t>(upper) + 1, 0);
  for (std::int32_t i = 0; i < n; ++i) {
    if (!ls[i]) {
      ++sum_s[s[i]];
    } else {
      ++sum_l[s[i] + 1];
    }
  }
  for (std::int32_t i = 0; i <= upper; ++i) {
    sum_s[i] += sum_l[i];
    if (i < upper) sum_l[i + 1] += sum_s[i];
  }

  Vec buf(static_cast<std::size_t>(upper) + 1);
  auto induce = [&](const Vec& lms) {
    std::fill(sa.begin(), sa.end(), -1);
    std::copy(sum_s.begin(), sum_s.end(), buf.begin());
    for (auto d : lms) {
      if (d == n) continue;
      sa[buf[s[d]]++] = d;
    }
    std::copy(sum_l.begin(), sum_l.end(), buf.begin());
    sa[buf[s[n - 1]]++] = n - 1;
    for (std::int32_t i = 0; i < n; ++i) {
      const std::int32_t v = sa[i];
      if (v >= 1 && !ls[v - 1]) sa[buf[s[v - 1]]++] = v - 1;
    }
    std::copy(sum_l.begin(), sum_l.end(), buf.begin());
    for (std::int32_t i = n - 1; i >= 0; --i) {
      const std::int32_t v = sa[i];
      if (v >= 1 && ls[v - 1]) sa[--buf[s[v - 1] + 1]] = v - 1;
    }
  };

  Vec lms_map(static_cast<std::size_t>(n) + 1, -1);
  std::int32_t m = 0;
  for (std::int32_t i = 1; i < n; ++i) {
    if (!ls[i - 1] && ls[i]) lms_map[i] = m++;
  }
  Vec lms;
  lms.reserve(static_cast<std::size_t>(m));
  for (std::int32_t i = 1; i < n; ++i) {
    if (!ls[i - 1] && ls[i]) lms.push_back(i);
  }
  induce(lms);

  if (m) {
    Vec sorted_lms;
    sorted_lms.reserve(static_cast<std::size_t>(m));
    for (auto v : sa) {
      if (lms_map[v] != -1) sorted_lms.push_back(v);
    }
    Vec rec_s(static_cast<std::size_t>(m));
    std::int32_t rec_upper = 0;
    rec_s[lms_map[sorted_lms[0]]] = 0;
    for (std::int32_t i = 1; i < m; ++i) {
      std::int32_t l = sorted_lms[i - 1];
      std::int32_t r = sorted_lms[i];
      const std::int32_t end_l = lms_map[l] + 1 < m ? lms[lms_map[l] + 1] : n;
      const std::int32_t end_r = lms_map[r] + 1 < m ? lms[lms_map[r] + 1] : n;
      bool same = true;
      if (end_l - l != end_r - r) {
        same = false;
      } else {
        while (l < end_l) {
          if (s[l] != s[r]) break;
          ++l;
          ++r;
        }
        if (l == n || s[l] != s[r]) same = false;
      }
      if (!same) ++rec_upper;
      rec_s[lms_map[sorted_lms[i]]] = rec_upper;
    }
    const Vec rec_sa = sa_is(rec_s, rec_upper);
    for (std::int32_t i = 0; i < m; ++i) sorted_lms[i] = lms[rec_sa[i]];
    induce(sorted_lms);
  }
  return sa;
}

template <typename Seq>
Vec kasai(const Seq& s, std::span<const std::int32_t> sa) {
  const std::size_t n = sa.size();
  Vec rank(n), lcp(n, 0);
  for (std::size_t i = 0; i < n; ++i) rank[static_cast<std::size_t>(sa[i])] = static_cast<std::int32_t>(i);
  std::int32_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (h > 0) --h;
    const auto r = static_cast<std::size_t>(rank[i]);
    if (r == 0) {
      h = 0;
      continue;
    }
    const auto j = static_cast<std::size_t>(sa[r - 1]);
    while (i + static_cast<std::size_t>(h) < n && j + static_cast<std::size_t>(h) < n &&
           s[i + static_cast<std::size_t>(h)] == s[j + static_cast<std::size_t>(h)])
      ++h;
    lcp[r] = h;
  }
  return lcp;
}

}  // namespace

std::vector<std::int32_t> suffix_array(std::span<const std::int32_t> s, std::int32_t upper) {
  for (auto c : s) {
    if (c < 0 || c > upper) throw ConfigError("suffix array symbol out of range");
  }
  return sa_is(s, upper);
}

std::vector<std::int32_t> suffix_array(std::string_view bytes) {
  Vec s(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) s[i] = static_cast<unsigned char>(bytes[i]);
  return sa_is(s, 255);
}

std::vector<std::int32_t> lcp_array(std::span<const std::int32_t> s, std::span<const std::int32_t> sa) {
  return kasai(s, sa);
}

std::vector<std::int32_t> lcp_array(std::string_view bytes, std::span<const std::int32_t> sa) {
  return kasai(bytes, sa);
}

CorpusSuffixArray CorpusSuffixArray::build(std::span<const std::string_view> docs) {
  CorpusSuffixArray out;
  std::size_t total = docs.size();
  for (auto d : docs) total += d.size();
  if (total > static_cast<std::size_t>(INT32_MAX)) throw ConfigError("corpus too large for the in-memory suffix array");
  out.text.reserve(total);
  out.doc_of.reserve(total);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (unsigned char c : docs[d]) {
      out.text.push_back(c);
      out.doc_of.push_back(static_cast<std::int32_t>(d));
    }
    out.text.push_back(256 + static_cast<std::int32_t>(d));
    out.doc_of.push_back(static_cast<std::int32_t>(d));
  }
  const auto upper = static_cast<std::int32_t>(255 + std::max<std::size_t>(docs.size(), 1));
  out.sa = sa_is(out.text, upper);
  out.lcp = kasai(out.text, out.sa);
  return out;
}

std::vector<std::vector<std::size_t>> substring_clusters(std::span<const std::string_view> docs, std::size_t min_len) {
  if (min_len == 0) throw ConfigError("substring_min_len must be positive");
  const auto csa = CorpusSuffixArray::build(docs);
  UnionFind uf(docs.size());
  for (std::size_t i = 1; i < csa.sa.size(); ++i) {
    if (static_cast<std::size_t>(csa.lcp[i]) < min_len) continue;
    const auto a = static_cast<std::size_t>(csa.doc_of[static_cast<std::size_t>(csa.sa[i - 1])]);
    const auto b = static_cast<std::size_t>(csa.doc_of[static_cast<std::size_t>(csa.sa[i])]);
    if (a != b) uf.unite(a, b);
  }
  return uf.clusters();
}

ClusterResult substring_dedup(std::span<const Document> docs, const DedupConfig& config) {
  config.validate();
  std::vector<std::size_t> eligible;
  std::vector<std::string_view> texts;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (unicode::length(docs[i].text) > config.long_doc_chars) {
      eligible.push_back(i);
      texts.push_back(docs[i].text);
    }
  }
  ClusterResult result;
  for (auto& c : substring_clusters(texts, config.substring_min_len)) {
    for (auto& member : c) member = eligible[member];
    result.clusters.push_back(std::move(c));
  }
  result.removed = keep_first(result.clusters, [](std::size_t) { return false; });
  return result;
}

}  // namespace textmill::dedup
