#include "clpd/thesaurus.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "clpd/error.hpp"
#include "clpd/hash.hpp"
#include "clpd/unicode.hpp"
#include "text_util.hpp"

namespace clpd {

namespace {

constexpr std::string_view kEnglish = "en";

std::string lookup_key(std::string_view lang, std::string_view lemma) {
    std::string k;
    k.reserve(lang.size() + lemma.size() + 1);
    k.append(lang).push_back('\t');
    k.append(lemma);
    return k;
}

bool valid_lemma(std::string_view s) {
    return !s.empty() && s.find_first_of("\t\n\r") == std::string_view::npos;
}

std::string rank_to_string(std::uint64_t r) {
    return r == ClusterDictionary::kNoRank ? std::string("inf") : std::to_string(r);
}

}  // namespace

std::string_view to_string(Pos pos) {
    switch (pos) {
        case Pos::Noun: return "NOUN";
        case Pos::Verb: return "VERB";
        case Pos::Adj: return "ADJ";
        case Pos::Adv: return "ADV";
        case Pos::Other: return "OTHER";
    }
    return "OTHER";
}

Pos parse_pos(std::string_view tag, bool* known) {
    std::string t = unicode::fold_case(tag);
    Pos p = Pos::Other;
    bool ok = true;
    if (t == "noun" || t == "n") p = Pos::Noun;
    else if (t == "verb" || t == "v") p = Pos::Verb;
    else if (t == "adj" || t == "a" || t == "s") p = Pos::Adj;
    else if (t == "adv" || t == "r") p = Pos::Adv;
    else if (t == "other") p = Pos::Other;
    else ok = false;
    if (known) *known = ok;
    return p;
}

std::string_view to_string(MergeMode mode) { return mode == MergeMode::All ? "all" : "top1"; }

MergeMode parse_merge_mode(std::string_view s) {
    std::string t = unicode::fold_case(s);
    if (t == "all") return MergeMode::All;
    if (t == "top1") return MergeMode::Top1;
    throw DataError("unknown merge mode: " + std::string(s));
}

std::string_view to_string(Provenance p) { return p == Provenance::WordNet ? "WORDNET" : "TRANSLATION"; }

bool operator<(const WordKey& a, const WordKey& b) {
    if (a.lang != b.lang) return a.lang < b.lang;
    if (a.lemma != b.lemma) return a.lemma < b.lemma;
    return to_string(a.pos) < to_string(b.pos);
}

// ---------------------------------------------------------------------------
// Loading

SenseLoadResult load_senses(std::istream& in) {
    SenseLoadResult out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = detail::split(line, '\t');
        if (cols.size() < 4 || cols.size() > 6) {
            throw ParseError("sense record needs 4-6 tab-separated columns, got " + std::to_string(cols.size()),
                             lineno);
        }
        SenseRecord r;
        r.concept_id = std::string(cols[0]);
        r.lang = std::string(cols[1]);
        r.lemma = unicode::fold_case(cols[2]);
        if (r.concept_id.empty() || r.lang.empty()) throw ParseError("empty concept id or language", lineno);
        if (!valid_lemma(r.lemma)) throw ParseError("empty lemma", lineno);
        bool known = true;
        r.pos = parse_pos(cols[3], &known);
        if (!known) ++out.unknown_pos;
        if (cols.size() > 4 && !cols[4].empty()) {
            std::uint32_t rank = 0;
            auto [p, ec] = std::from_chars(cols[4].data(), cols[4].data() + cols[4].size(), rank);
            if (ec != std::errc{} || p != cols[4].data() + cols[4].size()) {
                throw ParseError("bad freq_rank '" + std::string(cols[4]) + "'", lineno);
            }
            r.freq_rank = rank;
        }
        if (cols.size() > 5 && !cols[5].empty()) {
            double w = 0;
            auto [p, ec] = std::from_chars(cols[5].data(), cols[5].data() + cols[5].size(), w);
            if (ec != std::errc{} || p != cols[5].data() + cols[5].size() || w < 0.0 || w > 1.0) {
                throw ParseError("bad weight '" + std::string(cols[5]) + "'", lineno);
            }
            r.weight = w;
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

std::vector<TranslationRow> load_translations(std::istream& in) {
    std::vector<TranslationRow> rows;
    std::set<TranslationRow> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = detail::split(line, '\t');
        if (cols.size() != 4) throw ParseError("translation row needs 4 columns", lineno);
        TranslationRow r;
        r.en_lemma = unicode::fold_case(cols[0]);
        r.pos = parse_pos(cols[1]);
        r.target_lang = std::string(cols[2]);
        r.translated_lemma = unicode::fold_case(cols[3]);
        if (!valid_lemma(r.en_lemma) || !valid_lemma(r.translated_lemma) || r.target_lang.empty()) {
            throw ParseError("empty field in translation row", lineno);
        }
        if (r.target_lang == kEnglish) throw ParseError("translation target must not be 'en'", lineno);
        if (seen.insert(r).second) rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// ClusterDictionary

std::vector<std::string> ClusterDictionary::clusters(const WordKey& key) const {
    std::vector<std::string> out;
    if (auto it = entries_.find(key); it != entries_.end()) {
        for (const auto& [c, _] : it->second) out.push_back(c);
    }
    return out;
}

std::optional<Provenance> ClusterDictionary::provenance(const WordKey& key, std::string_view cluster) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    auto jt = it->second.find(std::string(cluster));
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
}

const std::set<Member>* ClusterDictionary::members(std::string_view cluster) const {
    auto it = members_.find(std::string(cluster));
    return it == members_.end() ? nullptr : &it->second;
}

std::uint64_t ClusterDictionary::cluster_rank(std::string_view cluster) const {
    auto it = ranks_.find(std::string(cluster));
    return it == ranks_.end() ? kNoRank : it->second;
}

std::span<const std::string> ClusterDictionary::lookup_all(std::string_view lang, std::string_view lemma) const {
    auto it = lookup_.find(lookup_key(lang, lemma));
    if (it == lookup_.end()) return {};
    return it->second.all;
}

std::optional<std::string_view> ClusterDictionary::lookup_top(std::string_view lang, std::string_view lemma) const {
    auto it = lookup_.find(lookup_key(lang, lemma));
    if (it == lookup_.end()) return std::nullopt;
    return std::string_view(it->second.top);
}

bool ClusterDictionary::covers(std::string_view lang, std::string_view lemma) const {
    return lookup_.contains(lookup_key(lang, lemma));
}

bool ClusterDictionary::insert(const WordKey& key, const std::string& cluster, Provenance prov) {
    return entries_[key].emplace(cluster, prov).second;
}

void ClusterDictionary::set_cluster_rank(const std::string& cluster, std::uint64_t rank) {
    auto [it, inserted] = ranks_.emplace(cluster, rank);
    if (!inserted) it->second = std::min(it->second, rank);
}

void ClusterDictionary::finalize() {
    members_.clear();
    languages_.clear();
    lookup_.clear();
    for (const auto& [key, cls] : entries_) {
        languages_.insert(key.lang);
        auto& lk = lookup_[lookup_key(key.lang, key.lemma)];
        for (const auto& [c, _] : cls) {
            members_[c].insert(Member{key.lang, key.lemma});
            if (std::find(lk.all.begin(), lk.all.end(), c) == lk.all.end()) lk.all.push_back(c);
        }
    }
    for (auto& [_, lk] : lookup_) {
        const std::string* best = nullptr;
        std::uint64_t best_rank = kNoRank;
        for (const auto& c : lk.all) {
            const auto r = cluster_rank(c);
            if (!best || r < best_rank || (r == best_rank && c < *best)) {
                best = &c;
                best_rank = r;
            }
        }
        lk.top = *best;
    }
}

bool ClusterDictionary::has_ambiguous_lemma() const {
    return std::any_of(lookup_.begin(), lookup_.end(), [](const auto& kv) { return kv.second.all.size() > 1; });
}

std::string ClusterDictionary::to_tsv() const {
    std::vector<std::string> lines;
    lines.reserve(entries_.size() + 1);
    for (const auto& [key, cls] : entries_) {
        for (const auto& [c, prov] : cls) {
            std::string l;
            l.append(key.lang).push_back('\t');
            l.append(key.lemma).push_back('\t');
            l.append(to_string(key.pos)).push_back('\t');
            l.append(c).push_back('\t');
            l.append(to_string(prov));
            lines.push_back(std::move(l));
        }
    }
    if (has_ambiguous_lemma()) {
        lines.push_back("#mode\t" + std::string(to_string(mode_)));
        if (mode_ == MergeMode::Top1) {
            for (const auto& [c, _] : members_) lines.push_back("#rank\t" + c + "\t" + rank_to_string(cluster_rank(c)));
        }
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out.push_back('\n');
    }
    return out;
}

ClusterDictionary ClusterDictionary::from_tsv(std::istream& in) {
    ClusterDictionary d;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = detail::split(line, '\t');
        if (line.front() == '#') {
            if (cols[0] == "#mode" && cols.size() == 2) {
                d.mode_ = parse_merge_mode(cols[1]);
            } else if (cols[0] == "#rank" && cols.size() == 3) {
                std::uint64_t r = kNoRank;
                if (cols[2] != "inf") {
                    auto [p, ec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), r);
                    if (ec != std::errc{} || p != cols[2].data() + cols[2].size()) {
                        throw ParseError("bad cluster rank", lineno);
                    }
                }
                d.ranks_[std::string(cols[1])] = r;
            } else {
                throw ParseError("unknown dictionary directive", lineno);
            }
            continue;
        }
        if (cols.size() != 5) throw ParseError("dictionary row needs 5 columns", lineno);
        bool known = true;
        WordKey key{std::string(cols[0]), std::string(cols[1]), parse_pos(cols[2], &known)};
        if (!known || !valid_lemma(key.lemma)) throw ParseError("bad dictionary row", lineno);
        Provenance prov;
        if (cols[4] == "WORDNET") prov = Provenance::WordNet;
        else if (cols[4] == "TRANSLATION") prov = Provenance::Translation;
        else throw ParseError("bad provenance '" + std::string(cols[4]) + "'", lineno);
        d.insert(key, std::string(cols[3]), prov);
    }
    d.finalize();
    return d;
}

std::string ClusterDictionary::fingerprint() const { return sha256_hex(to_tsv()); }

// ---------------------------------------------------------------------------
// Construction

namespace {

struct ConceptMember {
    std::string lang;
    std::string lemma;
    Pos pos;
};

struct Anchor {
    std::string lemma;
    Pos pos;
    friend bool operator<(const Anchor& a, const Anchor& b) {
        return std::tie(a.lemma, a.pos) < std::tie(b.lemma, b.pos);
    }
};

}  // namespace

ClusterDictionary build_clusters(std::span<const SenseRecord> records, MergeMode mode, BuildReport* report) {
    // anchor -> concept -> best rank seen for that (anchor, concept)
    std::map<Anchor, std::map<std::string, std::uint64_t>> anchors;
    std::map<std::string, std::vector<ConceptMember>> concept_members;
    for (const auto& r : records) {
        concept_members[r.concept_id].push_back({r.lang, r.lemma, r.pos});
        if (r.lang != kEnglish) continue;
        const std::uint64_t rank = r.freq_rank ? *r.freq_rank : ClusterDictionary::kNoRank;
        auto [it, inserted] = anchors[{r.lemma, r.pos}].emplace(r.concept_id, rank);
        if (!inserted) it->second = std::min(it->second, rank);
    }

    std::set<std::string> anchored_concepts;
    for (const auto& [_, concepts] : anchors) {
        for (const auto& [c, __] : concepts) anchored_concepts.insert(c);
    }

    ClusterDictionary dict(mode);
    if (mode == MergeMode::Top1) {
        std::set<std::string> chosen;
        for (const auto& [anchor, concepts] : anchors) {
            // std::map iterates concept ids ascending, so strict < keeps the smallest id on ties.
            auto best = concepts.begin();
            for (auto it = concepts.begin(); it != concepts.end(); ++it) {
                if (it->second < best->second) best = it;
            }
            dict.insert({std::string(kEnglish), anchor.lemma, anchor.pos}, best->first, Provenance::WordNet);
            dict.set_cluster_rank(best->first, best->second);
            chosen.insert(best->first);
        }
        for (const auto& c : chosen) {
            for (const auto& m : concept_members[c]) {
                if (m.lang == kEnglish) continue;  // English words map only to their own Top1 concept
                dict.insert({m.lang, m.lemma, m.pos}, c, Provenance::WordNet);
            }
        }
    } else {
        for (const auto& [anchor, concepts] : anchors) {
            std::string id;
            std::uint64_t rank = ClusterDictionary::kNoRank;
            for (const auto& [c, r] : concepts) {
                if (!id.empty()) id.push_back('+');
                id += c;
                rank = std::min(rank, r);
            }
            dict.set_cluster_rank(id, rank);
            dict.insert({std::string(kEnglish), anchor.lemma, anchor.pos}, id, Provenance::WordNet);
            for (const auto& [c, _] : concepts) {
                for (const auto& m : concept_members[c]) dict.insert({m.lang, m.lemma, m.pos}, id, Provenance::WordNet);
            }
        }
    }
    dict.finalize();

    if (report) {
        report->anchors = anchors.size();
        report->clusters = dict.cluster_count();
        report->concepts_without_anchor = 0;
        for (const auto& [c, _] : concept_members) {
            if (!anchored_concepts.contains(c)) ++report->concepts_without_anchor;
        }
    }
    return dict;
}

ClusterDictionary augment_clusters(const ClusterDictionary& dict, std::span<const TranslationRow> table,
                                   AugmentReport* report) {
    ClusterDictionary out = dict;
    AugmentReport rep;
    for (const auto& row : table) {
        auto targets = dict.clusters({std::string(kEnglish), row.en_lemma, row.pos});
        if (targets.empty()) {
            ++rep.skipped_no_anchor;
            continue;
        }
        for (const auto& c : targets) {
            if (out.insert({row.target_lang, row.translated_lemma, row.pos}, c, Provenance::Translation)) ++rep.added;
        }
    }
    out.finalize();
    if (report) *report = rep;
    return out;
}

double coverage(const ClusterDictionary& dict, std::span<const LangToken> tokens) {
    if (tokens.empty()) return 0.0;
    std::size_t hit = 0;
    for (const auto& t : tokens) {
        if (dict.covers(t.lang, t.lemma)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(tokens.size());
}

}  // namespace clpd
