#pragma once

// End-to-end detection: sentence-level candidate retrieval over a paragraph
// index followed by detailed analysis of every retrieved candidate.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clpd/analysis.hpp"
#include "clpd/evalkit.hpp"
#include "clpd/index.hpp"
#include "clpd/textproc.hpp"
#include "clpd/thesaurus.hpp"

namespace clpd {

/// Index attribute keys written by index_reference.
inline constexpr const char* kAttrDictionary = "dictionary";
inline constexpr const char* kAttrLanguage = "lang";
inline constexpr const char* kAttrMergeMode = "merge_mode";
inline constexpr const char* kAttrResources = "resources";

/// One index fragment per reference paragraph. All documents must share one
/// language. The returned index is sealed.
InvertedIndex index_reference(std::span<const Document> collection, const ClusterDictionary& dict,
                              const ResourceSet& resources, const RetrievalConfig& cfg);

struct DetectConfig {
    RetrievalConfig retrieval;
    double threshold = 0.5;
    /// Join consecutive detections that point into the same source paragraph.
    bool merge_adjacent = false;
};

struct ReportConfig {
    std::string dictionary;
    std::string resources;
    RetrievalConfig retrieval;
    double threshold = 0.5;
    std::string scorer;
    bool merge_adjacent = false;
};

struct Report {
    ReportConfig config;
    std::vector<Detection> detections;

    nlohmann::json to_json() const;
    static Report from_json(const nlohmann::json& j);
};

/// Candidates retrieved for one suspicious sentence.
struct TraceEntry {
    std::string susp_doc;
    std::size_t sentence = 0;
    Span span;
    std::vector<Candidate> candidates;
    std::vector<double> fragment_scores;  // best sentence-pair score per candidate

    nlohmann::json to_json(const InvertedIndex& index) const;
};

class Detector {
public:
    /// `dict`, `resources`, `index` and `scorer` must outlive the detector.
    /// Throws UsageError for an unsealed index and DataError when the
    /// dictionary fingerprint recorded in the index differs from `dict`.
    Detector(const InvertedIndex& index, const ClusterDictionary& dict, const ResourceSet& resources,
             const Scorer& scorer, DetectConfig cfg);

    Report detect(const Document& suspicious, std::vector<TraceEntry>* trace = nullptr) const;

    /// Documents are processed on `jobs` threads; output order follows input order
    /// and does not depend on `jobs`.
    Report detect_all(std::span<const Document> suspicious, unsigned jobs = 1,
                      std::vector<TraceEntry>* trace = nullptr,
                      const std::function<void(std::size_t done, std::size_t total)>& progress = {}) const;

    ReportConfig report_config() const;

private:
    std::vector<Detection> detect_doc(const Document& doc, std::vector<TraceEntry>* trace) const;

    const InvertedIndex& index_;
    const ClusterDictionary& dict_;
    const ResourceSet& resources_;
    const Scorer& scorer_;
    DetectConfig cfg_;
    std::string ref_lang_;
};

/// Convenience wrapper around Detector.
Report detect(const Document& suspicious, const InvertedIndex& index, const ClusterDictionary& dict,
              const ResourceSet& resources, const Scorer& scorer, const DetectConfig& cfg);

/// Candidate-retrieval evaluation: every suspicious sentence overlapping a
/// gold annotation is a query; its relevant items are the index fragments of
/// the annotated source document overlapping the source span.
struct RetrievalQueries {
    std::vector<std::vector<std::string>> results;  // fragment refs as strings, ranked
    std::vector<std::vector<std::string>> gold;
};

RetrievalQueries run_retrieval_queries(std::span<const Document> suspicious, std::span<const GoldAnnotation> gold,
                                       const InvertedIndex& index, const ClusterDictionary& dict,
                                       const ResourceSet& resources, const RetrievalConfig& cfg);

}  // namespace clpd
