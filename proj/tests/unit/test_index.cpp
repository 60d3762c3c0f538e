#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "clpd/error.hpp"
#include "clpd/index.hpp"
#include "oracles.hpp"

using namespace clpd;

namespace {

InvertedIndex two_fragment_index() {
    InvertedIndex idx;
    idx.add_fragment({"d0", 0, {0, 5}, "d0"}, {{"c1", "c2"}});
    idx.add_fragment({"d1", 0, {0, 5}, "d1"}, {{"c1"}});
    idx.seal();
    return idx;
}

std::vector<std::vector<std::string>> random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
    std::vector<std::vector<std::string>> docs(n);
    for (auto& d : docs) {
        const auto len = rng() % 15;
        for (std::size_t i = 0; i < len; ++i) d.push_back("t" + std::to_string(rng() % vocab));
    }
    return docs;
}

}  // namespace

TEST(Index, HandlesAssignedInOrder) {
    InvertedIndex idx;
    EXPECT_EQ(idx.add_fragment({"a", 0, {}, ""}, {{"c1", "c1", "c2"}}), 0u);
    EXPECT_EQ(idx.add_fragment({"a", 1, {}, ""}, {}), 1u);
    idx.seal();
    ASSERT_EQ(idx.postings("c1").size(), 1u);
    EXPECT_EQ(idx.postings("c1")[0].tf, 2u);
    EXPECT_EQ(idx.postings("c2")[0].tf, 1u);
    EXPECT_EQ(idx.length(1), 0u);
    EXPECT_DOUBLE_EQ(idx.avgdl(), 1.5);
}

TEST(Index, SealContract) {
    InvertedIndex idx;
    idx.add_fragment({"a", 0, {}, ""}, {{"x"}});
    EXPECT_THROW(idx.search({{"x"}}, {}), UsageError);
    idx.seal();
    EXPECT_THROW(idx.add_fragment({"a", 1, {}, ""}, {{"x"}}), UsageError);
    EXPECT_THROW(idx.seal(), UsageError);
}

TEST(Index, EmptyIndexSearchesEmpty) {
    InvertedIndex idx;
    idx.seal();
    EXPECT_TRUE(idx.search({{"x"}}, {}).empty());
    EXPECT_EQ(idx.avgdl(), 0.0);
}

TEST(Bm25, WorkedExample) {
    const auto idx = two_fragment_index();
    RetrievalConfig cfg;
    const std::vector<std::string> q = {"c2"};
    const double expected = 0.88 * std::log(2.0);
    EXPECT_NEAR(idx.bm25_score(0, q, cfg), expected, 1e-12);
    EXPECT_NEAR(idx.bm25_score(0, q, cfg), 0.6100, 5e-5);
    EXPECT_EQ(idx.bm25_score(1, q, cfg), 0.0);
    EXPECT_EQ(idx.bm25_score(0, std::vector<std::string>{"zz"}, cfg), 0.0);
}

TEST(Bm25, TopOne) {
    const auto idx = two_fragment_index();
    RetrievalConfig cfg;
    cfg.top_k = 1;
    const auto r = idx.search({{"c2"}}, cfg);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].fragment, 0u);
    EXPECT_NEAR(r[0].score, 0.88 * std::log(2.0), 1e-12);
}

TEST(Bm25, EmptyQueryAndZeroK) {
    const auto idx = two_fragment_index();
    EXPECT_TRUE(idx.search({}, {}).empty());
    RetrievalConfig cfg;
    cfg.top_k = 0;
    EXPECT_TRUE(idx.search({{"c1"}}, cfg).empty());
}

TEST(Bm25, DuplicateQueryTermsCountOnce) {
    const auto idx = two_fragment_index();
    const auto a = idx.search({{"c2"}}, {});
    const auto b = idx.search({{"c2", "c2", "c2"}}, {});
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(a[0].score, b[0].score);
}

TEST(Bm25, IdfNeverNegative) {
    for (std::size_t n = 1; n < 50; ++n) {
        for (std::size_t df = 0; df <= n; ++df) EXPECT_GE(bm25_idf(n, df, IdfVariant::NonNegative), 0.0);
    }
    EXPECT_LT(bm25_idf(10, 9, IdfVariant::Classic), 0.0);
}

TEST(Bm25, ConfigValidation) {
    RetrievalConfig cfg;
    cfg.k1 = 0;
    EXPECT_THROW(cfg.validate(), DataError);
    cfg.k1 = 1.2;
    cfg.b = 1.5;
    EXPECT_THROW(cfg.validate(), DataError);
}

TEST(Bm25, MatchesOracleOnRandomCorpora) {
    std::mt19937_64 rng(3);
    for (int iter = 0; iter < 40; ++iter) {
        const auto docs = random_corpus(rng, 1 + rng() % 120, 1 + rng() % 40);
        InvertedIndex idx;
        for (std::size_t i = 0; i < docs.size(); ++i) idx.add_fragment({"d", i, {}, ""}, {docs[i]});
        idx.seal();
        RetrievalConfig cfg;
        cfg.k1 = 0.5 + static_cast<double>(rng() % 100) / 50.0;
        cfg.b = static_cast<double>(rng() % 101) / 100.0;
        cfg.top_k = 1 + rng() % 30;
        std::vector<std::string> q;
        for (std::size_t i = 0; i < 1 + rng() % 6; ++i) q.push_back("t" + std::to_string(rng() % 45));
        const auto want = oracle::bm25_top(docs, q, cfg.k1, cfg.b, cfg.top_k);
        const auto got = idx.search({q}, cfg);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].fragment, want[i].doc);
            EXPECT_NEAR(got[i].score, want[i].score, 1e-9);
        }
    }
}

TEST(Bm25, SmallerKIsPrefix) {
    std::mt19937_64 rng(9);
    const auto docs = random_corpus(rng, 150, 20);
    InvertedIndex idx;
    for (std::size_t i = 0; i < docs.size(); ++i) idx.add_fragment({"d", i, {}, ""}, {docs[i]});
    idx.seal();
    RetrievalConfig big;
    big.top_k = 100;
    const TermSequence q{{"t1", "t2", "t3"}};
    const auto full = idx.search(q, big);
    for (std::size_t k = 0; k <= full.size(); ++k) {
        RetrievalConfig c;
        c.top_k = k;
        const auto part = idx.search(q, c);
        ASSERT_EQ(part.size(), k);
        for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(part[i].fragment, full[i].fragment);
    }
}

TEST(Index, SaveLoadDeterministic) {
    std::mt19937_64 rng(1);
    const auto docs = random_corpus(rng, 60, 25);
    auto build = [&] {
        InvertedIndex idx;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            idx.add_fragment({"doc-" + std::to_string(i / 3), i % 3, {i, i + 4}, "text \"" + std::to_string(i) + "\"\n"},
                             {docs[i]});
        }
        idx.set_attribute("dictionary", "abc");
        RetrievalConfig cfg;
        cfg.k1 = 0.9;
        cfg.idf = IdfVariant::Classic;
        idx.set_config(cfg);
        idx.seal();
        return idx;
    };
    std::ostringstream a, b;
    build().save(a);
    build().save(b);
    EXPECT_EQ(a.str(), b.str());

    std::istringstream in(a.str());
    const auto loaded = InvertedIndex::load(in);
    std::ostringstream c;
    loaded.save(c);
    EXPECT_EQ(c.str(), a.str());
    EXPECT_TRUE(loaded.sealed());
    EXPECT_EQ(loaded.config().k1, 0.9);
    EXPECT_EQ(loaded.config().idf, IdfVariant::Classic);
    EXPECT_EQ(*loaded.attribute("dictionary"), "abc");
    EXPECT_EQ(loaded.meta(4).text, "text \"4\"\n");
    const auto orig = build();
    const TermSequence q{{"t1", "t7"}};
    const auto r1 = orig.search(q, {});
    const auto r2 = loaded.search(q, {});
    ASSERT_EQ(r1.size(), r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        EXPECT_EQ(r1[i].fragment, r2[i].fragment);
        EXPECT_EQ(r1[i].score, r2[i].score);
    }
}

TEST(Index, LoadRejectsCorruptInput) {
    std::istringstream bad("not-an-index\n");
    EXPECT_THROW(InvertedIndex::load(bad), ParseError);
    std::ostringstream out;
    two_fragment_index().save(out);
    auto text = out.str();
    text = text.substr(0, text.size() / 2);
    std::istringstream trunc(text);
    EXPECT_THROW(InvertedIndex::load(trunc), ParseError);
}
