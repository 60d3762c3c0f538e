#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "clpd/error.hpp"
#include "clpd/io.hpp"
#include "clpd/pipeline.hpp"
#include "clpd/unicode.hpp"
#include "test_util.hpp"

using namespace clpd;
using clpd::testing::fixture;

namespace {

struct Tiny {
    ClusterDictionary dict;
    ResourceSet res;
    std::vector<Document> reference;
    std::vector<Document> suspicious;
    std::vector<GoldAnnotation> gold;

    Tiny() {
        std::ifstream s(fixture("tiny/senses.tsv"));
        std::ifstream t(fixture("tiny/translations.tsv"));
        dict = augment_clusters(build_clusters(load_senses(s).records, MergeMode::Top1), load_translations(t));
        res = ResourceSet::load_dir(fixture("tiny/resources"));
        reference = io::read_corpus(fixture("tiny/reference.jsonl"));
        suspicious = io::read_corpus(fixture("tiny/suspicious.jsonl"));
        gold = io::gold_from_json(nlohmann::json::parse(io::read_file(fixture("tiny/gold.json"))));
    }
};

std::string saved(const InvertedIndex& idx) {
    std::ostringstream out;
    idx.save(out);
    return out.str();
}

}  // namespace

TEST(IndexReference, OneFragmentPerParagraph) {
    Tiny t;
    const auto idx = index_reference(t.reference, t.dict, t.res, {});
    EXPECT_EQ(idx.size(), 6u);
    EXPECT_EQ(idx.meta(1).text, "The teacher reads a big book. Dr. Brown sees the city.");
    EXPECT_EQ(*idx.attribute(kAttrDictionary), t.dict.fingerprint());
    EXPECT_EQ(*idx.attribute(kAttrLanguage), "en");
    EXPECT_EQ(saved(idx), saved(index_reference(t.reference, t.dict, t.res, {})));
}

TEST(IndexReference, EmptyDocumentAndMixedLanguages) {
    Tiny t;
    std::vector<Document> docs = {{"a", "en", "One.\n\nTwo."}, {"b", "en", ""}, {"c", "en", "Three."}};
    EXPECT_EQ(index_reference(docs, t.dict, t.res, {}).size(), 3u);
    docs.push_back({"d", "ru", "Четыре."});
    EXPECT_THROW(index_reference(docs, t.dict, t.res, {}), DataError);
}

TEST(Detect, ForcedMatchFixtureIsPerfect) {
    Tiny t;
    const auto idx = index_reference(t.reference, t.dict, t.res, {});
    OverlapScorer scorer(t.dict, t.res);
    DetectConfig cfg;
    cfg.threshold = 0.5;
    Detector det(idx, t.dict, t.res, scorer, cfg);
    const auto report = det.detect_all(t.suspicious);
    ASSERT_EQ(report.detections.size(), t.gold.size());
    for (const auto& d : report.detections) EXPECT_EQ(d.score, 1.0);
    const auto m = char_pr(report.detections, t.gold);
    EXPECT_EQ(m.precision, 1.0);
    EXPECT_EQ(m.recall, 1.0);
    EXPECT_EQ(m.f1, 1.0);
}

TEST(Detect, UnaugmentedDictionaryMissesTranslatedWords) {
    Tiny t;
    std::ifstream s(fixture("tiny/senses.tsv"));
    const auto base = build_clusters(load_senses(s).records, MergeMode::Top1);
    const auto idx = index_reference(t.reference, base, t.res, {});
    OverlapScorer scorer(base, t.res);
    DetectConfig cfg;
    cfg.threshold = 0.99;
    const auto r = Detector(idx, base, t.res, scorer, cfg).detect_all(t.suspicious);
    EXPECT_EQ(r.detections.size(), t.gold.size() - 1);
}

TEST(Detect, JobsDoNotChangeOutput) {
    Tiny t;
    const auto idx = index_reference(t.reference, t.dict, t.res, {});
    OverlapScorer scorer(t.dict, t.res);
    Detector det(idx, t.dict, t.res, scorer, {});
    std::vector<Document> many;
    for (int i = 0; i < 8; ++i) {
        for (const auto& d : t.suspicious) many.push_back({d.id + "-" + std::to_string(i), d.lang, d.text});
    }
    const auto one = det.detect_all(many, 1).to_json().dump();
    EXPECT_EQ(det.detect_all(many, 4).to_json().dump(), one);
    EXPECT_EQ(det.detect_all(many, 16).to_json().dump(), one);
}

TEST(Detect, TraceAuditsCandidates) {
    Tiny t;
    const auto idx = index_reference(t.reference, t.dict, t.res, {});
    OverlapScorer scorer(t.dict, t.res);
    Detector det(idx, t.dict, t.res, scorer, {});
    std::vector<TraceEntry> trace;
    const auto report = det.detect_all(t.suspicious, 2, &trace);
    EXPECT_EQ(trace.size(), 6u);
    for (const auto& d : report.detections) {
        const auto it = std::find_if(trace.begin(), trace.end(),
                                     [&](const TraceEntry& e) { return e.susp_doc == d.susp_doc && e.span == d.susp_span; });
        ASSERT_NE(it, trace.end());
        EXPECT_TRUE(std::any_of(it->candidates.begin(), it->candidates.end(), [&](const Candidate& c) {
            return idx.meta(c.fragment).doc_id == d.src_doc && idx.meta(c.fragment).span.contains(d.src_span);
        }));
    }
    const auto j = trace.front().to_json(idx);
    EXPECT_TRUE(j.contains("candidates"));
}

TEST(Detect, SpansDisjointPerDocument) {
    Tiny t;
    const auto idx = index_reference(t.reference, t.dict, t.res, {});
    OverlapScorer scorer(t.dict, t.res);
    for (bool merge : {false, true}) {
        DetectConfig cfg;
        cfg.threshold = 0.0;
        cfg.merge_adjacent = merge;
        const auto r = Detector(idx, t.dict, t.res, scorer, cfg).detect_all(t.suspicious);
        for (std::size_t i = 1; i < r.detections.size(); ++i) {
            const auto& a = r.detections[i - 1];
            const auto& b = r.detections[i];
            if (a.susp_doc == b.susp_doc) EXPECT_LE(a.susp_span.end, b.susp_span.start);
        }
    }
}

TEST(Detect, MergeAdjacentJoinsSameSourceRuns) {
    DetectConfig cfg;
    cfg.merge_adjacent = true;
    const auto dict = build_clusters(clpd::testing::senses_from("c1\ten\tdog\tNOUN\t0\nc1\tru\tсобака\tNOUN\n"
                                                                "c2\ten\tcat\tNOUN\t0\nc2\tru\tкошка\tNOUN\n"),
                                     MergeMode::Top1);
    ResourceSet res;
    const std::vector<Document> ref = {{"r", "en", "Dog here. Cat there."}};
    const auto idx = index_reference(ref, dict, res, {});
    OverlapScorer scorer(dict, res);
    const Document susp{"s", "ru", "Собака. Кошка."};
    const auto merged = Detector(idx, dict, res, scorer, cfg).detect(susp);
    ASSERT_EQ(merged.detections.size(), 1u);
    EXPECT_EQ(merged.detections[0].susp_span, (Span{0, 14}));
    EXPECT_EQ(merged.detections[0].src_span, (Span{0, 20}));
    cfg.merge_adjacent = false;
    EXPECT_EQ(Detector(idx, dict, res, scorer, cfg).detect(susp).detections.size(), 2u);
}

TEST(Detect, EdgeCases) {
    Tiny t;
    const auto idx = index_reference(t.reference, t.dict, t.res, {});
    OverlapScorer scorer(t.dict, t.res);
    EXPECT_TRUE(detect({"x", "ru", "Кошка спит на крыше."}, idx, t.dict, t.res, scorer, {}).detections.empty());
    DetectConfig k0;
    k0.retrieval.top_k = 0;
    EXPECT_TRUE(detect(t.suspicious[0], idx, t.dict, t.res, scorer, k0).detections.empty());
    EXPECT_THROW(detect({"x", "en", "The old dog."}, idx, t.dict, t.res, scorer, {}), DataError);
}

TEST(Detect, RefusesMismatchedDictionaryAndUnsealedIndex) {
    Tiny t;
    const auto idx = index_reference(t.reference, t.dict, t.res, {});
    const auto other = build_clusters(clpd::testing::senses_from("c1\ten\tdog\tNOUN\t0\n"), MergeMode::Top1);
    OverlapScorer scorer(other, t.res);
    EXPECT_THROW(Detector(idx, other, t.res, scorer, {}), DataError);
    InvertedIndex open;
    EXPECT_THROW(Detector(open, t.dict, t.res, scorer, {}), UsageError);
}

TEST(Report, JsonRoundTrip) {
    Tiny t;
    const auto idx = index_reference(t.reference, t.dict, t.res, {});
    OverlapScorer scorer(t.dict, t.res);
    const auto r = Detector(idx, t.dict, t.res, scorer, {}).detect_all(t.suspicious);
    const auto back = Report::from_json(r.to_json());
    EXPECT_EQ(back.detections, r.detections);
    EXPECT_EQ(back.config.dictionary, t.dict.fingerprint());
    EXPECT_EQ(back.config.scorer, "overlap");
    EXPECT_EQ(back.to_json(), r.to_json());
    EXPECT_THROW(Report::from_json(nlohmann::json::parse(R"({"detections":[{"susp_doc":1}]})")), DataError);
}

TEST(RetrievalQueries, GoldSourcesFound) {
    Tiny t;
    const auto idx = index_reference(t.reference, t.dict, t.res, {});
    const auto q = run_retrieval_queries(t.suspicious, t.gold, idx, t.dict, t.res, {});
    ASSERT_EQ(q.results.size(), 5u);
    EXPECT_EQ(recall_at_k(q.results, q.gold, 1), 1.0);
    std::vector<Document> only_first = {t.reference[0]};
    const auto small = index_reference(only_first, t.dict, t.res, {});
    EXPECT_THROW(run_retrieval_queries(t.suspicious, t.gold, small, t.dict, t.res, {}), DataError);
}
