#pragma once

// Multilingual word clusters compiled from per-language sense inventories.
//
// An English (lemma, pos) pair anchors each cluster. Top1 keeps only the most
// frequent concept of the anchor; All merges every concept of the anchor.
// Words of any language are then mapped to the clusters whose synsets they
// belong to.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace clpd {

enum class Pos : std::uint8_t { Noun, Verb, Adj, Adv, Other };

std::string_view to_string(Pos pos);
/// Unknown tags map to Pos::Other; `known` reports whether the tag was recognised.
Pos parse_pos(std::string_view tag, bool* known = nullptr);

enum class MergeMode : std::uint8_t { All, Top1 };

std::string_view to_string(MergeMode mode);
MergeMode parse_merge_mode(std::string_view s);

enum class Provenance : std::uint8_t { WordNet, Translation };

std::string_view to_string(Provenance p);

struct SenseRecord {
    std::string lemma;  // case-folded
    std::string lang;
    Pos pos = Pos::Other;
    std::string concept_id;
    std::optional<std::uint32_t> freq_rank;
    std::optional<double> weight;

    friend bool operator==(const SenseRecord&, const SenseRecord&) = default;
};

struct SenseLoadResult {
    std::vector<SenseRecord> records;
    std::size_t unknown_pos = 0;
};

/// Parse sense-TSV: concept_id, lang, lemma, pos, freq_rank, weight.
/// Throws ParseError with the offending line number.
SenseLoadResult load_senses(std::istream& in);

struct TranslationRow {
    std::string en_lemma;
    Pos pos = Pos::Other;
    std::string target_lang;
    std::string translated_lemma;

    friend auto operator<=>(const TranslationRow&, const TranslationRow&) = default;
};

/// Parse translation-table TSV. Duplicate rows are dropped; rows targeting
/// "en" are rejected.
std::vector<TranslationRow> load_translations(std::istream& in);

struct WordKey {
    std::string lang;
    std::string lemma;
    Pos pos = Pos::Other;

    friend bool operator==(const WordKey&, const WordKey&) = default;
    // Orders like the compiled TSV: lang, lemma, then the POS tag name.
    friend bool operator<(const WordKey& a, const WordKey& b);
};

struct Member {
    std::string lang;
    std::string lemma;

    friend auto operator<=>(const Member&, const Member&) = default;
};

/// Immutable after construction by build_clusters/augment_clusters/from_tsv;
/// const access is thread-safe.
class ClusterDictionary {
public:
    /// Absent frequency rank.
    static constexpr std::uint64_t kNoRank = UINT64_MAX;

    ClusterDictionary() = default;
    explicit ClusterDictionary(MergeMode mode) : mode_(mode) {}

    MergeMode mode() const noexcept { return mode_; }
    const std::set<std::string>& languages() const noexcept { return languages_; }
    std::size_t entry_count() const noexcept { return entries_.size(); }
    std::size_t cluster_count() const noexcept { return members_.size(); }

    /// Cluster ids for one key, ascending.
    std::vector<std::string> clusters(const WordKey& key) const;
    std::optional<Provenance> provenance(const WordKey& key, std::string_view cluster) const;
    const std::set<Member>* members(std::string_view cluster) const;
    std::uint64_t cluster_rank(std::string_view cluster) const;

    /// Every cluster of (lang, lemma) under any POS, in compiled-TSV order
    /// with duplicates removed.
    std::span<const std::string> lookup_all(std::string_view lang, std::string_view lemma) const;
    /// Single cluster for (lang, lemma): lowest rank, ties by smallest id.
    std::optional<std::string_view> lookup_top(std::string_view lang, std::string_view lemma) const;
    bool covers(std::string_view lang, std::string_view lemma) const;

    /// Whole entry table in TSV order.
    const std::map<WordKey, std::map<std::string, Provenance>>& entries() const noexcept { return entries_; }
    const std::map<std::string, std::set<Member>>& member_table() const noexcept { return members_; }

    /// Deterministic sorted TSV. `#mode` / `#rank` lines are written only when
    /// some (lang, lemma) maps to several clusters, the one case where they
    /// change lookups.
    std::string to_tsv() const;
    static ClusterDictionary from_tsv(std::istream& in);

    /// SHA-256 of to_tsv().
    std::string fingerprint() const;

    /// Returns false if the (key, cluster) pair already existed.
    bool insert(const WordKey& key, const std::string& cluster, Provenance prov);
    void set_cluster_rank(const std::string& cluster, std::uint64_t rank);
    void finalize();

    /// Equal when the canonical serializations are equal.
    friend bool operator==(const ClusterDictionary& a, const ClusterDictionary& b) {
        return a.to_tsv() == b.to_tsv();
    }

private:
    bool has_ambiguous_lemma() const;

    struct Lookup {
        std::vector<std::string> all;
        std::string top;
    };

    MergeMode mode_ = MergeMode::Top1;
    std::map<WordKey, std::map<std::string, Provenance>> entries_;
    std::map<std::string, std::set<Member>> members_;
    std::map<std::string, std::uint64_t> ranks_;
    std::set<std::string> languages_;
    std::unordered_map<std::string, Lookup> lookup_;  // "lang\tlemma"
};

struct BuildReport {
    std::size_t concepts_without_anchor = 0;
    std::size_t anchors = 0;
    std::size_t clusters = 0;
};

ClusterDictionary build_clusters(std::span<const SenseRecord> records, MergeMode mode,
                                 BuildReport* report = nullptr);

struct AugmentReport {
    std::size_t added = 0;
    std::size_t skipped_no_anchor = 0;
};

ClusterDictionary augment_clusters(const ClusterDictionary& dict, std::span<const TranslationRow> table,
                                   AugmentReport* report = nullptr);

struct LangToken {
    std::string lang;
    std::string lemma;
};

/// Fraction of tokens with at least one cluster; 0 for an empty corpus.
double coverage(const ClusterDictionary& dict, std::span<const LangToken> tokens);

}  // namespace clpd
