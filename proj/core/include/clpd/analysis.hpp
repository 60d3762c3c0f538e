#pragma once

// Detailed analysis: sentence-pair translation scoring, best-candidate
// selection and decision-threshold calibration.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clpd/index.hpp"
#include "clpd/textproc.hpp"
#include "clpd/thesaurus.hpp"

namespace clpd {

struct PairText {
    std::string a;
    std::string la;
    std::string b;
    std::string lb;
};

/// Cross-lingual pair scorer. Implementations must be deterministic for a
/// fixed instance and safe to call from several threads.
class Scorer {
public:
    virtual ~Scorer() = default;

    /// One score in [0, 1] per input pair, in input order.
    virtual std::vector<double> score_batch(std::span<const PairText> pairs) const = 0;

    /// Identifier recorded in report fingerprints.
    virtual std::string id() const = 0;
};

/// Jaccard similarity of the conceptualized term sets of both texts.
class OverlapScorer final : public Scorer {
public:
    OverlapScorer(const ClusterDictionary& dict, const ResourceSet& resources);

    std::vector<double> score_batch(std::span<const PairText> pairs) const override;
    std::string id() const override;

    double score(const PairText& pair) const;
    static double jaccard(std::span<const std::string> a, std::span<const std::string> b);

private:
    const ClusterDictionary& dict_;
    const ResourceSet& resources_;
};

/// Validates scorer output (length and range) around Scorer::score_batch.
std::vector<double> score_pairs(const Scorer& scorer, std::span<const PairText> pairs);

struct PairVerdict {
    FragmentRef candidate = 0;
    Span candidate_sentence;  // in the candidate's source document
    double score = 0.0;
    bool is_translation = false;
};

/// Every sentence pair of one candidate fragment plus the max-scoring one.
struct FragmentVerdict {
    FragmentRef candidate = 0;
    std::vector<PairVerdict> pairs;
    PairVerdict best;
};

/// Segments `candidate` into sentences and scores each against the suspicious sentence.
FragmentVerdict compare_fragments(const Fragment& suspicious_sentence, std::string_view suspicious_lang,
                                  const FragmentMeta& candidate, FragmentRef candidate_ref,
                                  std::string_view candidate_lang, const Scorer& scorer, double threshold,
                                  const LangResources* candidate_resources = nullptr);

/// compare_fragments for every retrieved candidate, scored in a single batch.
std::vector<FragmentVerdict> compare_candidates(const Fragment& suspicious_sentence, std::string_view suspicious_lang,
                                                std::span<const Candidate> candidates, const InvertedIndex& index,
                                                std::string_view candidate_lang, const Scorer& scorer,
                                                double threshold, const LangResources* candidate_resources = nullptr);

/// Highest-scoring positive verdict; ties go to the smaller fragment ref.
std::optional<FragmentVerdict> select_best(std::span<const FragmentVerdict> verdicts);

struct Threshold {
    double value = 0.5;
    double beta = 0.25;
    /// F-beta reached on the calibration set; 0 when the value was supplied directly.
    double f_beta = 0.0;
};

/// (1 + b^2) P R / (b^2 P + R); 0 when P = R = 0.
double f_beta(double precision, double recall, double beta);

struct LabeledScore {
    double score = 0.0;
    bool positive = false;
};

/// Thresholds tried by calibrate: 0, 1 and every midpoint between adjacent
/// distinct scores, ascending.
std::vector<double> candidate_thresholds(std::span<const LabeledScore> dev);

/// F-beta maximizing threshold (predict positive when score >= t); ties pick
/// the largest threshold. Throws DataError unless both classes are present.
Threshold calibrate(std::span<const LabeledScore> dev, double beta = 0.25);

}  // namespace clpd
