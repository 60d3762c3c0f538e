#pragma once

// In-process inverted index over conceptualized reference fragments, ranked
// with Okapi BM25.

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clpd/textproc.hpp"

namespace clpd {

enum class IdfVariant : std::uint8_t {
    /// ln(1 + (N - n + 0.5) / (n + 0.5)); never negative.
    NonNegative,
    /// ln((N - n + 0.5) / (n + 0.5)); negative for terms in more than half the fragments.
    Classic,
};

std::string_view to_string(IdfVariant v);
IdfVariant parse_idf_variant(std::string_view s);

struct RetrievalConfig {
    double k1 = 1.2;
    double b = 0.75;
    std::size_t top_k = 50;
    IdfVariant idf = IdfVariant::NonNegative;

    /// Throws DataError when k1 <= 0 or b outside [0, 1].
    void validate() const;

    friend bool operator==(const RetrievalConfig&, const RetrievalConfig&) = default;
};

using FragmentRef = std::uint32_t;

struct Posting {
    FragmentRef fragment = 0;
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

struct FragmentMeta {
    std::string doc_id;
    std::size_t ordinal = 0;
    Span span;
    std::string text;

    friend bool operator==(const FragmentMeta&, const FragmentMeta&) = default;
};

struct Candidate {
    FragmentRef fragment = 0;
    double score = 0.0;
};

double bm25_idf(std::size_t n_fragments, std::size_t doc_freq, IdfVariant variant);

class InvertedIndex {
public:
    /// Build phase only. Handles are assigned 0, 1, 2, ... in call order.
    FragmentRef add_fragment(FragmentMeta meta, const TermSequence& terms);

    /// Freezes N and avgdl. A second call throws UsageError.
    void seal();
    bool sealed() const noexcept { return sealed_; }

    std::size_t size() const noexcept { return meta_.size(); }
    double avgdl() const noexcept { return avgdl_; }
    std::uint32_t length(FragmentRef ref) const;
    const FragmentMeta& meta(FragmentRef ref) const;
    std::size_t term_count() const noexcept { return terms_.size(); }
    std::size_t doc_freq(std::string_view term) const;
    std::span<const Posting> postings(std::string_view term) const;

    double bm25_score(FragmentRef ref, std::span<const std::string> query, const RetrievalConfig& cfg) const;

    /// Top-K fragments by BM25 score (descending, ties by ascending ref).
    /// Non-positive scores are dropped.
    std::vector<Candidate> search(const TermSequence& query, const RetrievalConfig& cfg) const;

    /// Free-form build metadata (dictionary fingerprint, language, ...).
    void set_attribute(const std::string& key, const std::string& value) { attrs_[key] = value; }
    const std::string* attribute(const std::string& key) const;
    const std::map<std::string, std::string>& attributes() const noexcept { return attrs_; }

    /// Retrieval settings recorded at build time.
    const RetrievalConfig& config() const noexcept { return config_; }
    void set_config(const RetrievalConfig& cfg) { config_ = cfg; }

    /// Line-based, versioned format; byte-identical for identical insertion order.
    void save(std::ostream& out) const;
    static InvertedIndex load(std::istream& in);

private:
    void require_sealed() const;
    static std::vector<std::string> unique_sorted(std::span<const std::string> terms);
    double term_weight(const Posting& p, double idf, const RetrievalConfig& cfg) const;

    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::string> terms_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::uint32_t> lengths_;
    std::vector<FragmentMeta> meta_;
    double avgdl_ = 0.0;
    bool sealed_ = false;
    RetrievalConfig config_;
    std::map<std::string, std::string> attrs_;
};

}  // namespace clpd
