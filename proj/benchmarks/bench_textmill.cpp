#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "corpus_fixture.hpp"
#include "textmill/dedup.hpp"
#include "textmill/html.hpp"
#include "textmill/pii.hpp"
#include "textmill/quality.hpp"

using namespace textmill;

namespace {

std::string text_of(std::size_t words, std::uint64_t seed) {
  testing::TextGen g(seed);
  return g.paragraph(testing::corpus_languages()[0], words);
}

void BM_CharRepetition(benchmark::State& state) {
  const auto text = text_of(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(quality::char_repetition(text, 10));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_CharRepetition)->Arg(100)->Arg(1000)->Arg(10000);

void BM_SuffixArray(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::string s(static_cast<std::size_t>(state.range(0)), 'a');
  for (auto& c : s) c = static_cast<char>('a' + rng() % 8);
  for (auto _ : state) benchmark::DoNotOptimize(dedup::suffix_array(s));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * s.size()));
}
BENCHMARK(BM_SuffixArray)->Range(1 << 10, 1 << 20);

void BM_SimHash(benchmark::State& state) {
  const auto text = text_of(500, 3);
  for (auto _ : state) benchmark::DoNotOptimize(dedup::simhash(text));
}
BENCHMARK(BM_SimHash);

void BM_SimHashPairs(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::vector<dedup::SimHash> sigs(static_cast<std::size_t>(state.range(0)));
  for (auto& s : sigs) s = rng();
  for (auto _ : state) benchmark::DoNotOptimize(dedup::simhash_pairs(sigs, 4));
}
BENCHMARK(BM_SimHashPairs)->Arg(10000)->Arg(100000);

void BM_MinHashSignature(benchmark::State& state) {
  const auto set = dedup::shingles(text_of(500, 5), 5);
  const dedup::MinHasher hasher(256, 7);
  for (auto _ : state) benchmark::DoNotOptimize(hasher.signature(set));
}
BENCHMARK(BM_MinHashSignature);

void BM_HtmlToText(benchmark::State& state) {
  const auto pages = testing::web_corpus(64, 6);
  std::size_t bytes = 0;
  for (auto _ : state)
    for (const auto& p : pages) {
      benchmark::DoNotOptimize(html::html_to_text(p.html));
      bytes += p.html.size();
    }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_HtmlToText);

void BM_PiiRedact(benchmark::State& state) {
  const auto text = text_of(300, 8) + " mail me at someone@example.org or 10.0.0.1";
  for (auto _ : state) benchmark::DoNotOptimize(pii::redact(text));
}
BENCHMARK(BM_PiiRedact);

}  // namespace

BENCHMARK_MAIN();
