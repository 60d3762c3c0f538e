#include <benchmark/benchmark.h>

#include <string>

#include "clpd/evalkit.hpp"
#include "clpd/textproc.hpp"

using namespace clpd;

namespace {

Document sample(std::size_t paragraphs) {
    SeededRng rng(5);
    static const char* words[] = {"river", "bank", "old", "dog", "runs", "the", "green", "garden", "Dr.", "Brown",
                                  "sees", "city", "1990", "teacher", "reads", "book"};
    std::string text;
    for (std::size_t p = 0; p < paragraphs; ++p) {
        if (p) text += "\n\n";
        for (int s = 0; s < 4; ++s) {
            std::string sentence = "The";
            for (auto n = rng.between(4, 14); n > 0; --n) sentence += std::string(" ") + words[rng.below(16)];
            text += sentence + (s == 3 ? "." : ". ");
        }
    }
    return {"bench", "en", text};
}

LangResources english() {
    auto r = LangResources::defaults("en");
    for (const char* w : {"the", "a", "of", "in"}) r.stopwords.insert(w);
    r.lemma_map["runs"] = "run";
    r.lemma_map["reads"] = "read";
    r.lemma_map["sees"] = "see";
    return r;
}

void BM_SegmentSentences(benchmark::State& state) {
    const auto doc = sample(static_cast<std::size_t>(state.range(0)));
    const auto res = english();
    for (auto _ : state) benchmark::DoNotOptimize(segment(doc, FragmentKind::Sentence, &res));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(doc.text.size()));
}
BENCHMARK(BM_SegmentSentences)->Arg(10)->Arg(200);

void BM_Normalize(benchmark::State& state) {
    const auto doc = sample(static_cast<std::size_t>(state.range(0)));
    const auto res = english();
    for (auto _ : state) benchmark::DoNotOptimize(normalize(doc.text, res));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(doc.text.size()));
}
BENCHMARK(BM_Normalize)->Arg(10)->Arg(200);

}  // namespace
