#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "clpd/textproc.hpp"
#include "clpd/unicode.hpp"
#include "test_util.hpp"
#include "world.hpp"

using namespace clpd;

namespace {

std::vector<std::string> texts(const std::vector<Fragment>& fs) {
    std::vector<std::string> out;
    for (const auto& f : fs) out.push_back(f.text);
    return out;
}

}  // namespace

TEST(Segment, ParagraphsOnBlankLines) {
    const auto ps = segment({"d", "en", "A b.\n\nC d."}, FragmentKind::Paragraph);
    EXPECT_EQ(texts(ps), (std::vector<std::string>{"A b.", "C d."}));
    EXPECT_EQ(ps[1].span, (Span{6, 10}));
    EXPECT_EQ(ps[1].ordinal, 1u);
}

TEST(Segment, SingleParagraph) {
    const auto ps = segment({"d", "en", "one paragraph only"}, FragmentKind::Paragraph);
    ASSERT_EQ(ps.size(), 1u);
    EXPECT_EQ(ps[0].span, (Span{0, 18}));
}

TEST(Segment, EmptyText) {
    EXPECT_TRUE(segment({"d", "en", ""}, FragmentKind::Paragraph).empty());
    EXPECT_TRUE(segment({"d", "en", " \n\n "}, FragmentKind::Sentence).empty());
}

TEST(Segment, AbbreviationDoesNotSplit) {
    const auto res = LangResources::defaults("en");
    const auto ss = segment({"d", "en", "Dr. Smith ran. He won."}, FragmentKind::Sentence, &res);
    EXPECT_EQ(texts(ss), (std::vector<std::string>{"Dr. Smith ran.", "He won."}));
}

TEST(Segment, LowercaseContinuationDoesNotSplit) {
    const auto ss = segment({"d", "en", "It costs 3.5 dollars. e.g. this one. Next!"}, FragmentKind::Sentence);
    EXPECT_EQ(texts(ss), (std::vector<std::string>{"It costs 3.5 dollars. e.g. this one.", "Next!"}));
}

TEST(Segment, ArmenianFullStop) {
    const auto ss = segment({"d", "hy", "Բարև աշխարհ։ Ինչպես ես։"}, FragmentKind::Sentence);
    EXPECT_EQ(texts(ss), (std::vector<std::string>{"Բարև աշխարհ։", "Ինչպես ես։"}));
    EXPECT_EQ(ss[1].span, (Span{13, 23}));
}

TEST(Segment, ClosingQuoteStaysWithSentence) {
    const auto ss = segment({"d", "en", "He said \"stop.\" Then left."}, FragmentKind::Sentence);
    EXPECT_EQ(texts(ss), (std::vector<std::string>{"He said \"stop.\"", "Then left."}));
}

TEST(Segment, ParagraphBreakEndsSentence) {
    const auto ss = segment({"d", "en", "no terminator\n\nsecond one"}, FragmentKind::Sentence);
    EXPECT_EQ(texts(ss), (std::vector<std::string>{"no terminator", "second one"}));
}

// Spans are ordered, disjoint, in bounds and cut exactly the fragment text.
TEST(Segment, PropertySpansOnRandomText) {
    const std::vector<std::string> alphabet = {"a", "B", "я", "Ж", "ա", "Բ", ".", "!", "?", "։", " ", " ", "\n",
                                               "\n\n", "\"", ")", "7", "Dr.", "\t"};
    std::mt19937_64 rng(11);
    const auto res = LangResources::defaults("en");
    for (int iter = 0; iter < 500; ++iter) {
        std::string text;
        const auto n = rng() % 80;
        for (std::size_t i = 0; i < n; ++i) text += alphabet[rng() % alphabet.size()];
        const Document doc{"d", "en", text};
        const auto len = unicode::length(text);
        for (auto kind : {FragmentKind::Sentence, FragmentKind::Paragraph}) {
            std::size_t prev_end = 0;
            std::size_t ord = 0;
            for (const auto& f : segment(doc, kind, &res)) {
                EXPECT_LE(prev_end, f.span.start);
                EXPECT_LT(f.span.start, f.span.end);
                EXPECT_LE(f.span.end, len);
                EXPECT_EQ(unicode::substr(text, f.span.start, f.span.end), f.text);
                EXPECT_EQ(f.ordinal, ord++);
                EXPECT_FALSE(unicode::is_space(unicode::decode(f.text).front()));
                EXPECT_FALSE(unicode::is_space(unicode::decode(f.text).back()));
                prev_end = f.span.end;
            }
        }
        // Sentences never cross paragraph boundaries.
        const auto paras = segment(doc, FragmentKind::Paragraph, &res);
        for (const auto& s : segment(doc, FragmentKind::Sentence, &res)) {
            EXPECT_TRUE(std::any_of(paras.begin(), paras.end(), [&](const Fragment& p) { return p.span.contains(s.span); }));
        }
    }
}

TEST(Tokenize, PeelsOuterPunctuation) {
    EXPECT_EQ(tokenize("Dogs barked, 42 at-home (really)!"),
              (std::vector<std::string>{"Dogs", "barked", ",", "42", "at-home", "(", "really", ")", "!"}));
}

TEST(Normalize, RemovalRules) {
    LangResources res;
    res.lemma_map = {{"dogs", "dog"}, {"barked", "bark"}};
    EXPECT_EQ(normalize("Dogs barked , 42 at-home", res), (std::vector<std::string>{"dog", "bark"}));
}

TEST(Normalize, AllStopwords) {
    LangResources res;
    res.stopwords = {"the", "a", "of"};
    EXPECT_TRUE(normalize("The a OF the.", res).empty());
}

TEST(Normalize, NumberBoundary) {
    LangResources res;
    EXPECT_EQ(normalize("π3a 1,000.5 3 000 x", res), (std::vector<std::string>{"π3a", "x"}));
    EXPECT_TRUE(is_number_token("1.000,5"));
    EXPECT_FALSE(is_number_token("π3a"));
    EXPECT_FALSE(is_number_token("..."));
}

TEST(Normalize, StopwordCheckedAfterLemmatization) {
    LangResources res;
    res.stopwords = {"be"};
    res.lemma_map = {{"is", "be"}};
    EXPECT_TRUE(normalize("is", res).empty());
}

TEST(Normalize, PostconditionOnWorldCorpus) {
    const auto w = clpd::testing::make_world();
    for (const auto& lang : {std::string("en"), w.l2}) {
        const auto& res = w.resources.get(lang);
        for (std::size_t i = 0; i < 300; ++i) {
            const auto& text = lang == "en" ? w.parallel[i].l1 : w.parallel[i].l2;
            for (const auto& t : normalize(text, res)) {
                EXPECT_FALSE(res.stopwords.contains(t));
                EXPECT_FALSE(is_number_token(t));
                EXPECT_FALSE(has_punctuation(t));
                EXPECT_EQ(unicode::fold_case(t), t);
            }
        }
    }
}

TEST(Conceptualize, UnmappedWordsPassThrough) {
    const auto d = build_clusters(clpd::testing::senses_from("c_fin\ten\tbank\tNOUN\t0\nc_river\ten\tbank\tNOUN\t1\n"),
                                  MergeMode::Top1);
    const std::vector<std::string> lemmas = {"bank", "xylophone"};
    EXPECT_EQ(conceptualize(lemmas, "en", d).terms, (std::vector<std::string>{"c_fin", "xylophone"}));
    EXPECT_TRUE(conceptualize(std::vector<std::string>{}, "en", d).terms.empty());
}

// Brute force: scan the compiled TSV top to bottom and collect ids for the word.
TEST(Conceptualize, AllModeMatchesTsvScan) {
    const auto w = clpd::testing::make_world();
    const auto d = augment_clusters(build_clusters(w.senses, MergeMode::All), w.translations);
    std::istringstream in(d.to_tsv());
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> scan;
    std::string line;
    while (std::getline(in, line)) {
        if (line[0] == '#') continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string col;
        while (std::getline(ls, col, '\t')) f.push_back(col);
        auto& ids = scan[{f[0], f[1]}];
        if (std::find(ids.begin(), ids.end(), f[3]) == ids.end()) ids.push_back(f[3]);
    }
    std::size_t multi = 0;
    for (const auto& [word, ids] : scan) {
        const std::vector<std::string> one = {word.second};
        EXPECT_EQ(conceptualize(one, word.first, d).terms, ids);
        multi += ids.size() > 1;
    }
    EXPECT_GT(multi, 10u);
}

TEST(Conceptualize, LengthProperties) {
    const auto w = clpd::testing::make_world();
    const auto top1 = augment_clusters(build_clusters(w.senses, MergeMode::Top1), w.translations);
    const auto all = augment_clusters(build_clusters(w.senses, MergeMode::All), w.translations);
    for (std::size_t i = 0; i < 200; ++i) {
        const auto lemmas = normalize(w.parallel[i].l2, w.resources.get(w.l2));
        EXPECT_EQ(conceptualize(lemmas, w.l2, top1).terms.size(), lemmas.size());
        EXPECT_GE(conceptualize(lemmas, w.l2, all).terms.size(), lemmas.size());
    }
}

TEST(Conceptualize, DeterministicPipeline) {
    const auto w = clpd::testing::make_world();
    const auto d = build_clusters(w.senses, MergeMode::Top1);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(to_terms(w.parallel[i].l1, "en", w.resources, d), to_terms(w.parallel[i].l1, "en", w.resources, d));
    }
}

TEST(Resources, LoadDirAndFingerprint) {
    const auto rs = ResourceSet::load_dir(clpd::testing::fixture("tiny/resources"));
    EXPECT_TRUE(rs.get("en").stopwords.contains("the"));
    EXPECT_EQ(rs.get("ru").lemma_map.at("книгу"), "книга");
    EXPECT_TRUE(rs.get("en").abbreviations.contains("dr."));
    EXPECT_EQ(rs.fingerprint(), ResourceSet::load_dir(clpd::testing::fixture("tiny/resources")).fingerprint());
    EXPECT_NE(rs.fingerprint(), ResourceSet{}.fingerprint());
}
