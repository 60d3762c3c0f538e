#include "clpd/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "clpd/error.hpp"

namespace clpd {

OverlapScorer::OverlapScorer(const ClusterDictionary& dict, const ResourceSet& resources)
    : dict_(dict), resources_(resources) {}

std::string OverlapScorer::id() const { return "overlap"; }

double OverlapScorer::jaccard(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::string> sa(a.begin(), a.end());
    std::vector<std::string> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
    std::sort(sb.begin(), sb.end());
    sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
    if (sa.empty() && sb.empty()) return 0.0;
    std::size_t inter = 0;
    auto i = sa.begin();
    auto j = sb.begin();
    while (i != sa.end() && j != sb.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else {
            ++inter;
            ++i;
            ++j;
        }
    }
    const std::size_t uni = sa.size() + sb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double OverlapScorer::score(const PairText& pair) const {
    const auto ta = to_terms(pair.a, pair.la, resources_, dict_);
    const auto tb = to_terms(pair.b, pair.lb, resources_, dict_);
    return jaccard(ta.terms, tb.terms);
}

std::vector<double> OverlapScorer::score_batch(std::span<const PairText> pairs) const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(score(p));
    return out;
}

std::vector<double> score_pairs(const Scorer& scorer, std::span<const PairText> pairs) {
    if (pairs.empty()) return {};
    auto scores = scorer.score_batch(pairs);
    if (scores.size() != pairs.size()) {
        throw DataError("scorer '" + scorer.id() + "' returned " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(pairs.size()) + " pairs");
    }
    for (double s : scores) {
        if (!(s >= 0.0 && s <= 1.0)) throw DataError("scorer '" + scorer.id() + "' returned a score outside [0, 1]");
    }
    return scores;
}

namespace {

struct CandidateRef {
    FragmentRef ref;
    const FragmentMeta* meta;
};

std::vector<FragmentVerdict> compare_impl(const Fragment& susp, std::string_view susp_lang,
                                          std::span<const CandidateRef> cands, std::string_view cand_lang,
                                          const Scorer& scorer, double threshold, const LangResources* cand_res) {
    std::vector<std::vector<Fragment>> sentences;
    std::vector<PairText> batch;
    for (const auto& c : cands) {
        Document cdoc{c.meta->doc_id, std::string(cand_lang), c.meta->text};
        sentences.push_back(segment(cdoc, FragmentKind::Sentence, cand_res));
        for (const auto& s : sentences.back()) {
            batch.push_back({susp.text, std::string(susp_lang), s.text, std::string(cand_lang)});
        }
    }
    const auto scores = score_pairs(scorer, batch);

    std::vector<FragmentVerdict> out;
    out.reserve(cands.size());
    std::size_t k = 0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
        FragmentVerdict v;
        v.candidate = cands[c].ref;
        v.best = PairVerdict{cands[c].ref, cands[c].meta->span, 0.0, false};
        const std::size_t base = cands[c].meta->span.start;
        for (const auto& s : sentences[c]) {
            const double score = scores[k++];
            PairVerdict pv{cands[c].ref, {base + s.span.start, base + s.span.end}, score, score >= threshold};
            if (v.pairs.empty() || pv.score > v.best.score) v.best = pv;
            v.pairs.push_back(pv);
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

FragmentVerdict compare_fragments(const Fragment& suspicious_sentence, std::string_view suspicious_lang,
                                  const FragmentMeta& candidate, FragmentRef candidate_ref,
                                  std::string_view candidate_lang, const Scorer& scorer, double threshold,
                                  const LangResources* candidate_resources) {
    const CandidateRef c{candidate_ref, &candidate};
    return compare_impl(suspicious_sentence, suspicious_lang, std::span(&c, 1), candidate_lang, scorer, threshold,
                        candidate_resources)
        .front();
}

std::vector<FragmentVerdict> compare_candidates(const Fragment& suspicious_sentence, std::string_view suspicious_lang,
                                                std::span<const Candidate> candidates, const InvertedIndex& index,
                                                std::string_view candidate_lang, const Scorer& scorer,
                                                double threshold, const LangResources* candidate_resources) {
    std::vector<CandidateRef> refs;
    refs.reserve(candidates.size());
    for (const auto& c : candidates) refs.push_back({c.fragment, &index.meta(c.fragment)});
    return compare_impl(suspicious_sentence, suspicious_lang, refs, candidate_lang, scorer, threshold,
                        candidate_resources);
}

std::optional<FragmentVerdict> select_best(std::span<const FragmentVerdict> verdicts) {
    const FragmentVerdict* best = nullptr;
    for (const auto& v : verdicts) {
        if (!v.best.is_translation) continue;
        if (!best || v.best.score > best->best.score ||
            (v.best.score == best->best.score && v.candidate < best->candidate)) {
            best = &v;
        }
    }
    if (!best) return std::nullopt;
    return *best;
}

double f_beta(double precision, double recall, double beta) {
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    if (denom <= 0.0) return 0.0;
    return (1.0 + b2) * precision * recall / denom;
}

std::vector<double> candidate_thresholds(std::span<const LabeledScore> dev) {
    std::vector<double> s;
    s.reserve(dev.size());
    for (const auto& d : dev) s.push_back(d.score);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::vector<double> out;
    out.reserve(s.size() + 1);
    out.push_back(0.0);
    for (std::size_t i = 1; i < s.size(); ++i) out.push_back((s[i - 1] + s[i]) / 2.0);
    out.push_back(1.0);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Threshold calibrate(std::span<const LabeledScore> dev, double beta) {
    if (!(beta > 0.0)) throw DataError("beta must be > 0");
    std::size_t total_pos = 0;
    for (const auto& d : dev) total_pos += d.positive ? 1 : 0;
    if (total_pos == 0 || total_pos == dev.size()) {
        throw DataError("calibration needs both positive and negative examples");
    }

    std::vector<LabeledScore> sorted(dev.begin(), dev.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const LabeledScore& a, const LabeledScore& b) { return a.score > b.score; });
    const auto thresholds = candidate_thresholds(dev);

    // Walk thresholds from high to low, admitting scores >= t as predicted positives.
    Threshold best{1.0, beta, -1.0};
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t next = 0;
    for (auto it = thresholds.rbegin(); it != thresholds.rend(); ++it) {
        const double t = *it;
        while (next < sorted.size() && sorted[next].score >= t) {
            (sorted[next].positive ? tp : fp) += 1;
            ++next;
        }
        const double p = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double r = static_cast<double>(tp) / static_cast<double>(total_pos);
        const double f = f_beta(p, r, beta);
        if (f > best.f_beta) best = {t, beta, f};  // strict: the larger threshold wins ties
    }
    return best;
}

}  // namespace clpd
