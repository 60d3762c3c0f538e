#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clpd/thesaurus.hpp"

namespace clpd {

/// Half-open code point range [start, end).
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const noexcept { return end > start ? end - start : 0; }
    bool contains(const Span& o) const noexcept { return start <= o.start && o.end <= end; }
    bool overlaps(const Span& o) const noexcept { return start < o.end && o.start < end; }

    friend auto operator<=>(const Span&, const Span&) = default;
};

struct Document {
    std::string id;
    std::string lang;
    std::string text;

    friend bool operator==(const Document&, const Document&) = default;
};

enum class FragmentKind : std::uint8_t { Sentence, Paragraph };

struct Fragment {
    std::string doc_id;
    FragmentKind kind = FragmentKind::Paragraph;
    std::size_t ordinal = 0;
    Span span;  // in the parent document
    std::string text;
};

struct LangResources {
    std::string lang;
    std::unordered_set<std::string> stopwords;
    std::unordered_map<std::string, std::string> lemma_map;
    /// Tokens ending in '.' that do not end a sentence, case-folded ("dr.").
    std::set<std::string> abbreviations;

    /// Resources with the built-in abbreviation list for `lang` and nothing else.
    static LangResources defaults(std::string_view lang);

    void load_stopwords(std::istream& in);
    /// `surface<TAB>lemma` lines.
    void load_lemma_map(std::istream& in);
    void load_abbreviations(std::istream& in);
};

/// Per-language resources. Unknown languages fall back to defaults().
class ResourceSet {
public:
    const LangResources& get(std::string_view lang) const;
    LangResources& at(std::string_view lang);

    /// Loads `<lang>.stopwords`, `<lang>.lemmas.tsv` and `<lang>.abbrev` files found in `dir`.
    static ResourceSet load_dir(const std::filesystem::path& dir);

    /// Stable digest of every loaded resource.
    std::string fingerprint() const;

private:
    std::map<std::string, LangResources, std::less<>> by_lang_;
};

struct TermSequence {
    std::vector<std::string> terms;

    friend bool operator==(const TermSequence&, const TermSequence&) = default;
};

/// Paragraphs are separated by whitespace runs holding two or more newlines.
/// Sentences end after . ! ? or ։ (plus closing quotes/brackets) when followed
/// by whitespace and an uppercase letter or digit, unless the token is a known
/// abbreviation. Paragraph breaks always end a sentence.
std::vector<Fragment> segment(const Document& doc, FragmentKind kind, const LangResources* res = nullptr);

/// Whitespace split, then leading/trailing punctuation peeled off as
/// separate tokens. Inner punctuation stays attached ("at-home").
std::vector<std::string> tokenize(std::string_view text);

bool is_number_token(std::string_view token);
bool has_punctuation(std::string_view token);

/// Case-fold, lemmatize, drop stopwords, numbers and tokens with punctuation.
std::vector<std::string> normalize(std::string_view text, const LangResources& res);
inline std::vector<std::string> normalize(const Fragment& f, const LangResources& res) {
    return normalize(f.text, res);
}

/// Replace lemmas with cluster ids. Top1 dictionaries emit a single id per
/// covered lemma; All dictionaries emit every id. Uncovered lemmas pass through.
TermSequence conceptualize(std::span<const std::string> lemmas, std::string_view lang, const ClusterDictionary& dict);

/// normalize + conceptualize.
TermSequence to_terms(std::string_view text, std::string_view lang, const ResourceSet& res,
                      const ClusterDictionary& dict);

}  // namespace clpd
