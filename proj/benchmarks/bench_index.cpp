#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "clpd/evalkit.hpp"
#include "clpd/index.hpp"

using namespace clpd;

namespace {

std::vector<TermSequence> corpus(std::size_t n, std::size_t vocab, std::uint64_t seed) {
    SeededRng rng(seed);
    std::vector<TermSequence> docs(n);
    for (auto& d : docs) {
        const auto len = rng.between(5, 40);
        // skewed draw so a few terms are very common
        for (std::uint64_t i = 0; i < len; ++i) {
            const double u = rng.unit();
            d.terms.push_back("c" + std::to_string(static_cast<std::size_t>(u * u * static_cast<double>(vocab))));
        }
    }
    return docs;
}

InvertedIndex build(const std::vector<TermSequence>& docs) {
    InvertedIndex idx;
    for (std::size_t i = 0; i < docs.size(); ++i) idx.add_fragment({"d" + std::to_string(i), 0, {0, 1}, ""}, docs[i]);
    idx.seal();
    return idx;
}

void BM_IndexBuild(benchmark::State& state) {
    const auto docs = corpus(static_cast<std::size_t>(state.range(0)), 5000, 1);
    for (auto _ : state) {
        auto idx = build(docs);
        benchmark::DoNotOptimize(idx.avgdl());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(1000)->Arg(10000);

void BM_Search(benchmark::State& state) {
    const auto idx = build(corpus(static_cast<std::size_t>(state.range(0)), 5000, 2));
    const auto queries = corpus(256, 5000, 3);
    RetrievalConfig cfg;
    std::size_t q = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(idx.search(queries[q++ % queries.size()], cfg));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Search)->Arg(1000)->Arg(10000)->Arg(50000);

}  // namespace
BENCHMARK_MAIN();
