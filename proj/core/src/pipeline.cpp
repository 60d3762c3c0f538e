#include "clpd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "clpd/error.hpp"

namespace clpd {

InvertedIndex index_reference(std::span<const Document> collection, const ClusterDictionary& dict,
                              const ResourceSet& resources, const RetrievalConfig& cfg) {
    cfg.validate();
    InvertedIndex index;
    std::string lang;
    for (const auto& doc : collection) {
        if (lang.empty()) lang = doc.lang;
        if (doc.lang != lang) {
            throw DataError("reference document '" + doc.id + "' has language '" + doc.lang + "', expected '" + lang +
                            "'");
        }
        for (auto& para : segment(doc, FragmentKind::Paragraph)) {
            const auto terms = to_terms(para.text, doc.lang, resources, dict);
            index.add_fragment({doc.id, para.ordinal, para.span, std::move(para.text)}, terms);
        }
    }
    index.set_config(cfg);
    index.set_attribute(kAttrDictionary, dict.fingerprint());
    index.set_attribute(kAttrLanguage, lang);
    index.set_attribute(kAttrMergeMode, std::string(to_string(dict.mode())));
    index.set_attribute(kAttrResources, resources.fingerprint());
    index.seal();
    return index;
}

// ---------------------------------------------------------------------------
// Report

nlohmann::json Report::to_json() const {
    nlohmann::json cfg = {
        {"dictionary", config.dictionary},
        {"resources", config.resources},
        {"k", config.retrieval.top_k},
        {"k1", config.retrieval.k1},
        {"b", config.retrieval.b},
        {"idf", std::string(to_string(config.retrieval.idf))},
        {"threshold", config.threshold},
        {"scorer", config.scorer},
        {"merge_adjacent", config.merge_adjacent},
    };
    nlohmann::json dets = nlohmann::json::array();
    for (const auto& d : detections) {
        dets.push_back({{"susp_doc", d.susp_doc},
                        {"susp_span", {d.susp_span.start, d.susp_span.end}},
                        {"src_doc", d.src_doc},
                        {"src_span", {d.src_span.start, d.src_span.end}},
                        {"score", d.score}});
    }
    return {{"config", cfg}, {"detections", dets}};
}

Report Report::from_json(const nlohmann::json& j) {
    Report r;
    try {
        if (j.contains("config")) {
            const auto& c = j.at("config");
            r.config.dictionary = c.value("dictionary", "");
            r.config.resources = c.value("resources", "");
            r.config.retrieval.top_k = c.value("k", std::size_t{50});
            r.config.retrieval.k1 = c.value("k1", 1.2);
            r.config.retrieval.b = c.value("b", 0.75);
            r.config.retrieval.idf = parse_idf_variant(c.value("idf", std::string("nonneg")));
            r.config.threshold = c.value("threshold", 0.5);
            r.config.scorer = c.value("scorer", "");
            r.config.merge_adjacent = c.value("merge_adjacent", false);
        }
        for (const auto& d : j.at("detections")) {
            r.detections.push_back({d.at("susp_doc").get<std::string>(),
                                    {d.at("susp_span").at(0).get<std::size_t>(), d.at("susp_span").at(1).get<std::size_t>()},
                                    d.at("src_doc").get<std::string>(),
                                    {d.at("src_span").at(0).get<std::size_t>(), d.at("src_span").at(1).get<std::size_t>()},
                                    d.at("score").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad report: ") + e.what());
    }
    return r;
}

nlohmann::json TraceEntry::to_json(const InvertedIndex& index) const {
    nlohmann::json cands = nlohmann::json::array();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& m = index.meta(candidates[i].fragment);
        nlohmann::json c = {{"fragment", candidates[i].fragment},
                            {"src_doc", m.doc_id},
                            {"src_span", {m.span.start, m.span.end}},
                            {"bm25", candidates[i].score}};
        if (i < fragment_scores.size()) c["score"] = fragment_scores[i];
        cands.push_back(std::move(c));
    }
    return {{"susp_doc", susp_doc}, {"sentence", sentence}, {"span", {span.start, span.end}}, {"candidates", cands}};
}

// ---------------------------------------------------------------------------
// Detector

Detector::Detector(const InvertedIndex& index, const ClusterDictionary& dict, const ResourceSet& resources,
                   const Scorer& scorer, DetectConfig cfg)
    : index_(index), dict_(dict), resources_(resources), scorer_(scorer), cfg_(std::move(cfg)) {
    if (!index_.sealed()) throw UsageError("detect requires a sealed index");
    cfg_.retrieval.validate();
    if (const auto* fp = index_.attribute(kAttrDictionary); fp && *fp != dict_.fingerprint()) {
        throw DataError("dictionary fingerprint " + dict_.fingerprint() + " does not match the index (" + *fp +
                        "); rebuild the index with this dictionary");
    }
    if (const auto* lang = index_.attribute(kAttrLanguage)) ref_lang_ = *lang;
}

ReportConfig Detector::report_config() const {
    ReportConfig c;
    c.dictionary = dict_.fingerprint();
    c.resources = resources_.fingerprint();
    c.retrieval = cfg_.retrieval;
    c.threshold = cfg_.threshold;
    c.scorer = scorer_.id();
    c.merge_adjacent = cfg_.merge_adjacent;
    return c;
}

std::vector<Detection> Detector::detect_doc(const Document& doc, std::vector<TraceEntry>* trace) const {
    if (!ref_lang_.empty() && doc.lang == ref_lang_) {
        throw DataError("suspicious document '" + doc.id + "' is in the reference language '" + ref_lang_ + "'");
    }
    const auto& susp_res = resources_.get(doc.lang);
    const auto& ref_res = resources_.get(ref_lang_);

    struct Hit {
        std::size_t sentence;
        FragmentRef fragment;
        Detection det;
    };
    std::vector<Hit> hits;

    for (const auto& sent : segment(doc, FragmentKind::Sentence, &susp_res)) {
        const auto terms = conceptualize(normalize(sent.text, susp_res), doc.lang, dict_);
        std::vector<Candidate> cands;
        if (!terms.terms.empty()) cands = index_.search(terms, cfg_.retrieval);
        std::vector<FragmentVerdict> verdicts;
        if (!cands.empty()) {
            verdicts = compare_candidates(sent, doc.lang, cands, index_, ref_lang_, scorer_, cfg_.threshold, &ref_res);
        }
        if (trace) {
            TraceEntry te{doc.id, sent.ordinal, sent.span, cands, {}};
            for (const auto& v : verdicts) te.fragment_scores.push_back(v.best.score);
            trace->push_back(std::move(te));
        }
        if (auto best = select_best(verdicts)) {
            hits.push_back({sent.ordinal, best->candidate,
                            Detection{doc.id, sent.span, index_.meta(best->candidate).doc_id,
                                      best->best.candidate_sentence, best->best.score}});
        }
    }

    std::vector<Detection> out;
    if (!cfg_.merge_adjacent) {
        for (auto& h : hits) out.push_back(std::move(h.det));
        return out;
    }
    for (std::size_t i = 0; i < hits.size();) {
        Detection merged = hits[i].det;
        std::size_t j = i + 1;
        while (j < hits.size() && hits[j].sentence == hits[j - 1].sentence + 1 &&
               hits[j].fragment == hits[i].fragment) {
            merged.susp_span.end = hits[j].det.susp_span.end;
            merged.src_span.start = std::min(merged.src_span.start, hits[j].det.src_span.start);
            merged.src_span.end = std::max(merged.src_span.end, hits[j].det.src_span.end);
            merged.score = std::max(merged.score, hits[j].det.score);
            ++j;
        }
        out.push_back(std::move(merged));
        i = j;
    }
    return out;
}

Report Detector::detect(const Document& suspicious, std::vector<TraceEntry>* trace) const {
    Report r;
    r.config = report_config();
    r.detections = detect_doc(suspicious, trace);
    return r;
}

Report Detector::detect_all(std::span<const Document> suspicious, unsigned jobs, std::vector<TraceEntry>* trace,
                            const std::function<void(std::size_t, std::size_t)>& progress) const {
    const std::size_t n = suspicious.size();
    std::vector<std::vector<Detection>> per_doc(n);
    std::vector<std::vector<TraceEntry>> per_trace(trace ? n : 0);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mu;

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                per_doc[i] = detect_doc(suspicious[i], trace ? &per_trace[i] : nullptr);
            } catch (...) {
                errors[i] = std::current_exception();
            }
            const auto d = ++done;
            if (progress) {
                std::lock_guard lock(progress_mu);
                progress(d, n);
            }
        }
    };

    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    Report r;
    r.config = report_config();
    for (auto& d : per_doc) std::move(d.begin(), d.end(), std::back_inserter(r.detections));
    if (trace) {
        for (auto& t : per_trace) std::move(t.begin(), t.end(), std::back_inserter(*trace));
    }
    return r;
}

Report detect(const Document& suspicious, const InvertedIndex& index, const ClusterDictionary& dict,
              const ResourceSet& resources, const Scorer& scorer, const DetectConfig& cfg) {
    return Detector(index, dict, resources, scorer, cfg).detect(suspicious);
}

// ---------------------------------------------------------------------------
// Retrieval evaluation

RetrievalQueries run_retrieval_queries(std::span<const Document> suspicious, std::span<const GoldAnnotation> gold,
                                       const InvertedIndex& index, const ClusterDictionary& dict,
                                       const ResourceSet& resources, const RetrievalConfig& cfg) {
    std::map<std::string, std::vector<FragmentRef>> fragments_of;
    for (FragmentRef r = 0; r < index.size(); ++r) fragments_of[index.meta(r).doc_id].push_back(r);

    std::map<std::string, std::vector<const GoldAnnotation*>> gold_by_doc;
    for (const auto& g : gold) gold_by_doc[g.susp_doc].push_back(&g);

    RetrievalQueries out;
    for (const auto& doc : suspicious) {
        auto git = gold_by_doc.find(doc.id);
        if (git == gold_by_doc.end()) continue;
        const auto& res = resources.get(doc.lang);
        for (const auto& sent : segment(doc, FragmentKind::Sentence, &res)) {
            std::vector<std::string> relevant;
            bool overlaps = false;
            for (const auto* g : git->second) {
                if (!g->susp_span.overlaps(sent.span)) continue;
                overlaps = true;
                auto fit = fragments_of.find(g->src_doc);
                if (fit == fragments_of.end()) continue;
                for (auto r : fit->second) {
                    if (index.meta(r).span.overlaps(g->src_span)) relevant.push_back(std::to_string(r));
                }
            }
            if (!overlaps) continue;
            if (relevant.empty()) {
                throw DataError("gold source for sentence " + std::to_string(sent.ordinal) + " of '" + doc.id +
                                "' is not in the index");
            }
            std::sort(relevant.begin(), relevant.end());
            relevant.erase(std::unique(relevant.begin(), relevant.end()), relevant.end());

            const auto terms = conceptualize(normalize(sent.text, res), doc.lang, dict);
            std::vector<std::string> ranked;
            for (const auto& c : index.search(terms, cfg)) ranked.push_back(std::to_string(c.fragment));
            out.results.push_back(std::move(ranked));
            out.gold.push_back(std::move(relevant));
        }
    }
    return out;
}

}  // namespace clpd
