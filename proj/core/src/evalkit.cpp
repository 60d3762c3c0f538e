#include "clpd/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <unordered_set>

#include "clpd/error.hpp"
#include "clpd/unicode.hpp"

namespace clpd {

// ---------------------------------------------------------------------------
// Metrics

double recall_at_k(std::span<const std::vector<std::string>> results,
                   std::span<const std::vector<std::string>> gold, std::size_t k) {
    if (results.size() != gold.size()) throw DataError("recall_at_k: results and gold differ in length");
    if (gold.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t q = 0; q < gold.size(); ++q) {
        const std::set<std::string> relevant(gold[q].begin(), gold[q].end());
        if (relevant.empty()) throw DataError("recall_at_k: query " + std::to_string(q) + " has no gold ids");
        const std::size_t n = std::min(k, results[q].size());
        std::set<std::string> found;
        for (std::size_t i = 0; i < n; ++i) {
            if (relevant.contains(results[q][i])) found.insert(results[q][i]);
        }
        sum += static_cast<double>(found.size()) / static_cast<double>(relevant.size());
    }
    return sum / static_cast<double>(gold.size());
}

namespace {

void check_span(const std::string& doc, const Span& s, const std::map<std::string, std::size_t>* lengths) {
    if (s.start > s.end) throw DataError("span start after end in " + doc);
    if (!lengths) return;
    auto it = lengths->find(doc);
    if (it == lengths->end()) throw DataError("unknown document " + doc);
    if (s.end > it->second) {
        throw DataError("span [" + std::to_string(s.start) + "," + std::to_string(s.end) + ") outside document " + doc);
    }
}

}  // namespace

PrfMetrics char_pr(std::span<const Detection> detections, std::span<const GoldAnnotation> gold,
                   const std::map<std::string, std::size_t>* doc_lengths) {
    struct Marked {
        Span span;
        const std::string* src;
    };
    std::map<std::string, std::vector<Marked>> det_by_doc;
    std::map<std::string, std::vector<Marked>> gold_by_doc;
    for (const auto& d : detections) {
        check_span(d.susp_doc, d.susp_span, doc_lengths);
        det_by_doc[d.susp_doc].push_back({d.susp_span, &d.src_doc});
    }
    for (const auto& g : gold) {
        check_span(g.susp_doc, g.susp_span, doc_lengths);
        gold_by_doc[g.susp_doc].push_back({g.susp_span, &g.src_doc});
    }

    std::set<std::string> docs;
    for (const auto& [d, _] : det_by_doc) docs.insert(d);
    for (const auto& [d, _] : gold_by_doc) docs.insert(d);

    std::size_t detected = 0;
    std::size_t relevant = 0;
    std::size_t correct = 0;
    static const std::vector<Marked> kNone;
    for (const auto& doc : docs) {
        auto dit = det_by_doc.find(doc);
        auto git = gold_by_doc.find(doc);
        const auto& dets = dit == det_by_doc.end() ? kNone : dit->second;
        const auto& golds = git == gold_by_doc.end() ? kNone : git->second;

        std::vector<std::size_t> cuts;
        for (const auto& m : dets) cuts.insert(cuts.end(), {m.span.start, m.span.end});
        for (const auto& m : golds) cuts.insert(cuts.end(), {m.span.start, m.span.end});
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const Span piece{cuts[i], cuts[i + 1]};
            std::set<std::string_view> det_src;
            std::set<std::string_view> gold_src;
            for (const auto& m : dets) {
                if (m.span.contains(piece)) det_src.insert(*m.src);
            }
            for (const auto& m : golds) {
                if (m.span.contains(piece)) gold_src.insert(*m.src);
            }
            const std::size_t len = piece.length();
            if (!det_src.empty()) detected += len;
            if (!gold_src.empty()) relevant += len;
            const bool match = std::any_of(det_src.begin(), det_src.end(),
                                           [&](std::string_view s) { return gold_src.contains(s); });
            if (match) correct += len;
        }
    }

    PrfMetrics m;
    m.precision = detected ? static_cast<double>(correct) / static_cast<double>(detected) : 0.0;
    m.recall = relevant ? static_cast<double>(correct) / static_cast<double>(relevant) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

PrfMetrics Confusion::metrics() const {
    PrfMetrics m;
    m.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

Confusion confusion_at(std::span<const double> scores, std::span<const PairExample> examples, double threshold) {
    if (scores.size() != examples.size()) throw DataError("confusion_at: size mismatch");
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (predicted && examples[i].translation) ++c.tp;
        else if (predicted) ++c.fp;
        else if (examples[i].translation) ++c.fn;
        else ++c.tn;
    }
    return c;
}

PrfMetrics pair_metrics(std::span<const PairExample> examples, const Scorer& scorer, double threshold) {
    const auto pos = std::count_if(examples.begin(), examples.end(), [](const auto& e) { return e.translation; });
    if (pos == 0 || static_cast<std::size_t>(pos) == examples.size()) {
        throw DataError("pair_metrics needs both translation and non-translation examples");
    }
    std::vector<PairText> batch;
    batch.reserve(examples.size());
    for (const auto& e : examples) batch.push_back({e.a, e.la, e.b, e.lb});
    const auto scores = score_pairs(scorer, batch);
    return confusion_at(scores, examples, threshold).metrics();
}

// ---------------------------------------------------------------------------
// Randomness

std::uint64_t SeededRng::below(std::uint64_t n) {
    if (n == 0) throw DataError("SeededRng::below(0)");
    // Rejection sampling for an unbiased draw.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double SeededRng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------
// Plagiarism dataset generation

namespace {

struct PendingSentence {
    std::string text;
    std::optional<std::size_t> gold;  // index into GeneratedDataset::gold
};

using Paragraph = std::vector<PendingSentence>;

std::string make_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%05zu", prefix, i);
    return buf;
}

// Renders paragraphs ("\n\n"-separated, sentences joined by a space) and
// reports each sentence's code point span through `on_span`.
template <typename F>
std::string render(const std::vector<Paragraph>& paragraphs, F&& on_span) {
    std::string text;
    std::size_t pos = 0;
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
        if (p > 0) {
            text += "\n\n";
            pos += 2;
        }
        for (std::size_t s = 0; s < paragraphs[p].size(); ++s) {
            if (s > 0) {
                text += ' ';
                pos += 1;
            }
            const auto& sent = paragraphs[p][s];
            const std::size_t len = unicode::length(sent.text);
            on_span(sent, Span{pos, pos + len});
            text += sent.text;
            pos += len;
        }
    }
    return text;
}

}  // namespace

GeneratedDataset generate_dataset(std::span<const Document> hosts, std::span<const ParallelPair> parallel,
                                  const GenConfig& cfg) {
    if (hosts.empty()) throw DataError("generate_dataset: no host documents");
    if (!(cfg.min_fraction >= 0.0 && cfg.min_fraction <= cfg.max_fraction && cfg.max_fraction <= 1.0)) {
        throw DataError("generate_dataset: bad plagiarism fraction range");
    }
    if (cfg.min_sources == 0 || cfg.min_sources > cfg.max_sources) {
        throw DataError("generate_dataset: bad sources-per-document range");
    }
    if (cfg.reference_docs == 0) throw DataError("generate_dataset: need at least one reference document");

    SeededRng rng(cfg.seed);
    std::vector<std::size_t> pool(parallel.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    rng.shuffle(pool);
    std::size_t next_pair = 0;

    constexpr std::size_t kMaxSourceParagraph = 4;

    GeneratedDataset out;
    std::vector<std::vector<Paragraph>> ref_sources(cfg.reference_docs);

    for (std::size_t d = 0; d < cfg.suspicious_docs; ++d) {
        const Document& host = hosts[rng.below(hosts.size())];
        const auto res = LangResources::defaults(host.lang);

        std::vector<Paragraph> paras;
        std::vector<PendingSentence*> flat;
        for (const auto& p : segment(host, FragmentKind::Paragraph)) {
            Paragraph para;
            for (const auto& s : segment(Document{host.id, host.lang, p.text}, FragmentKind::Sentence, &res)) {
                para.push_back({s.text, std::nullopt});
            }
            paras.push_back(std::move(para));
        }
        for (auto& p : paras) {
            for (auto& s : p) flat.push_back(&s);
        }

        const std::size_t n = flat.size();
        const double fraction = rng.uniform(cfg.min_fraction, cfg.max_fraction);
        const auto m = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
        if (next_pair + m > pool.size()) throw DataError("generate_dataset: not enough parallel pairs");

        std::vector<std::size_t> positions(n);
        for (std::size_t i = 0; i < n; ++i) positions[i] = i;
        rng.shuffle(positions);
        positions.resize(m);
        std::sort(positions.begin(), positions.end());

        std::size_t sources = rng.between(cfg.min_sources, cfg.max_sources);
        sources = std::min({sources, m, cfg.reference_docs});
        std::vector<std::size_t> ref_order(cfg.reference_docs);
        for (std::size_t i = 0; i < ref_order.size(); ++i) ref_order[i] = i;
        rng.shuffle(ref_order);

        const std::string susp_id = make_id("susp", d);
        std::vector<std::pair<std::size_t, std::size_t>> gold_sentence;  // (gold index, sentence position)
        for (std::size_t g = 0; g < sources; ++g) {
            const std::size_t begin = g * m / sources;
            const std::size_t end = (g + 1) * m / sources;
            const std::size_t ref = ref_order[g];
            Paragraph chunk;
            for (std::size_t k = begin; k < end; ++k) {
                const auto& pair = parallel[pool[next_pair++]];
                const std::size_t gi = out.gold.size();
                out.gold.push_back({susp_id, {}, make_id("ref", ref), {}});
                flat[positions[k]]->text = pair.l2;
                flat[positions[k]]->gold = gi;
                chunk.push_back({pair.l1, gi});
                if (chunk.size() == kMaxSourceParagraph) {
                    ref_sources[ref].push_back(std::move(chunk));
                    chunk.clear();
                }
            }
            if (!chunk.empty()) ref_sources[ref].push_back(std::move(chunk));
        }

        Document doc{susp_id, host.lang, {}};
        doc.text = render(paras, [&](const PendingSentence& s, Span span) {
            if (s.gold) out.gold[*s.gold].susp_span = span;
        });
        out.suspicious.push_back(std::move(doc));
    }

    // Distractor paragraphs from the unused pairs, then source paragraphs at random positions.
    for (std::size_t r = 0; r < cfg.reference_docs; ++r) {
        std::vector<Paragraph> paras;
        for (std::size_t f = 0; f < cfg.filler_paragraphs && next_pair < pool.size(); ++f) {
            Paragraph para;
            for (std::size_t s = 0; s < cfg.sentences_per_filler && next_pair < pool.size(); ++s) {
                para.push_back({parallel[pool[next_pair++]].l1, std::nullopt});
            }
            paras.push_back(std::move(para));
        }
        for (auto& src : ref_sources[r]) {
            const auto at = rng.below(paras.size() + 1);
            paras.insert(paras.begin() + static_cast<std::ptrdiff_t>(at), std::move(src));
        }
        Document doc{make_id("ref", r), cfg.l1_lang, {}};
        doc.text = render(paras, [&](const PendingSentence& s, Span span) {
            if (s.gold) out.gold[*s.gold].src_span = span;
        });
        out.reference.push_back(std::move(doc));
    }

    std::sort(out.gold.begin(), out.gold.end(), [](const GoldAnnotation& a, const GoldAnnotation& b) {
        return std::tie(a.susp_doc, a.susp_span) < std::tie(b.susp_doc, b.susp_span);
    });
    return out;
}

std::vector<PairExample> build_pair_dataset(std::span<const ParallelPair> parallel,
                                            std::size_t negatives_per_positive, std::uint64_t seed,
                                            const std::string& l1_lang, const std::string& l2_lang) {
    std::vector<ParallelPair> pairs;
    {
        std::set<ParallelPair> seen;
        for (const auto& p : parallel) {
            if (p.l1.empty() || p.l2.empty()) throw DataError("build_pair_dataset: empty sentence");
            if (seen.insert(p).second) pairs.push_back(p);
        }
    }
    if (pairs.size() < 2) throw DataError("build_pair_dataset: need at least two distinct parallel pairs");

    SeededRng rng(seed);
    std::set<std::pair<std::string_view, std::string_view>> used;
    for (const auto& p : pairs) used.emplace(p.l1, p.l2);

    std::vector<PairExample> out;
    const std::size_t n = pairs.size();
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({pairs[i].l1, l1_lang, pairs[i].l2, l2_lang, true});

        auto acceptable = [&](std::size_t j) {
            return j != i && pairs[j].l2 != pairs[i].l2 && !used.contains({pairs[i].l1, pairs[j].l2});
        };
        std::vector<std::size_t> picked;
        auto take = [&](std::size_t j) {
            used.emplace(pairs[i].l1, pairs[j].l2);
            picked.push_back(j);
        };
        const std::size_t budget = 50 * negatives_per_positive + 100;
        for (std::size_t attempt = 0; attempt < budget && picked.size() < negatives_per_positive; ++attempt) {
            const auto j = rng.below(n);
            if (acceptable(j)) take(j);
        }
        if (picked.size() < negatives_per_positive) {
            std::vector<std::size_t> rest;
            for (std::size_t j = 0; j < n; ++j) rest.push_back(j);
            rng.shuffle(rest);
            for (auto j : rest) {
                if (picked.size() == negatives_per_positive) break;
                if (acceptable(j)) take(j);
            }
        }
        for (auto j : picked) out.push_back({pairs[i].l1, l1_lang, pairs[j].l2, l2_lang, false});
    }
    return out;
}

}  // namespace clpd
