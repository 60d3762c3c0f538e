#pragma once

// Evaluation metrics and synthetic dataset generation.

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "clpd/analysis.hpp"
#include "clpd/textproc.hpp"

namespace clpd {

struct Detection {
    std::string susp_doc;
    Span susp_span;
    std::string src_doc;
    Span src_span;
    double score = 0.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct GoldAnnotation {
    std::string susp_doc;
    Span susp_span;
    std::string src_doc;
    Span src_span;

    friend bool operator==(const GoldAnnotation&, const GoldAnnotation&) = default;
};

struct PrfMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Mean over queries of |top-k ∩ gold| / |gold|. Duplicate ids in a result
/// list count once. Throws DataError on a query with empty gold.
double recall_at_k(std::span<const std::vector<std::string>> results,
                   std::span<const std::vector<std::string>> gold, std::size_t k);

/// Micro-averaged character-level precision/recall over suspicious documents.
/// A detected character is correct when a gold annotation with the same
/// source document covers it. `doc_lengths`, when given, bounds-checks spans.
PrfMetrics char_pr(std::span<const Detection> detections, std::span<const GoldAnnotation> gold,
                   const std::map<std::string, std::size_t>* doc_lengths = nullptr);

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    PrfMetrics metrics() const;
};

struct PairExample {
    std::string a;
    std::string la;
    std::string b;
    std::string lb;
    bool translation = false;

    friend bool operator==(const PairExample&, const PairExample&) = default;
};

Confusion confusion_at(std::span<const double> scores, std::span<const PairExample> examples, double threshold);

/// Binary P/R/F1 with "translation" as the positive class. Throws DataError
/// unless both classes are present.
PrfMetrics pair_metrics(std::span<const PairExample> examples, const Scorer& scorer, double threshold);

struct ParallelPair {
    std::string l1;
    std::string l2;

    friend auto operator<=>(const ParallelPair&, const ParallelPair&) = default;
};

/// Portable draws on top of mt19937_64 (std distributions differ between
/// standard libraries, which would break seed reproducibility).
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);
    /// Uniform in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
    /// Uniform in [0, 1).
    double unit();
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

struct GenConfig {
    std::uint64_t seed = 1;
    double min_fraction = 0.2;
    double max_fraction = 0.8;
    std::size_t min_sources = 1;
    std::size_t max_sources = 10;
    std::size_t suspicious_docs = 10;
    std::size_t reference_docs = 20;
    /// Distractor paragraphs per reference document, built from parallel
    /// pairs not used for plagiarism.
    std::size_t filler_paragraphs = 3;
    std::size_t sentences_per_filler = 3;
    std::string l1_lang = "en";
};

struct GeneratedDataset {
    std::vector<Document> suspicious;
    std::vector<Document> reference;
    std::vector<GoldAnnotation> gold;  // one per inserted sentence
};

/// Builds suspicious documents from L2 hosts by replacing a uniformly drawn
/// fraction of host sentences with L2 translations; the L1 originals are
/// inserted as paragraphs into 1..N reference documents. Deterministic per seed.
GeneratedDataset generate_dataset(std::span<const Document> hosts, std::span<const ParallelPair> parallel,
                                  const GenConfig& cfg);

/// One positive per distinct parallel pair plus `negatives_per_positive`
/// random mismatched pairs (L1 sentence with another pair's L2 sentence).
/// No (a, b) pair appears twice.
std::vector<PairExample> build_pair_dataset(std::span<const ParallelPair> parallel,
                                            std::size_t negatives_per_positive, std::uint64_t seed,
                                            const std::string& l1_lang, const std::string& l2_lang);

}  // namespace clpd
