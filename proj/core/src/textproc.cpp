#include "clpd/textproc.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "clpd/error.hpp"
#include "clpd/hash.hpp"
#include "clpd/unicode.hpp"
#include "text_util.hpp"

namespace clpd {

namespace {

const std::map<std::string, std::vector<std::string>, std::less<>>& builtin_abbreviations() {
    static const std::map<std::string, std::vector<std::string>, std::less<>> table = {
        {"en", {"mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.", "vs.", "etc.", "e.g.", "i.e.", "fig.",
                "no.", "inc.", "ltd.", "co.", "approx.", "dept.", "gen.", "gov.", "mt.", "jan.", "feb.", "aug.",
                "sept.", "oct.", "nov.", "dec.", "u.s.", "a.m.", "p.m.", "cf.", "al."}},
        {"ru", {"т.е.", "т.д.", "т.п.", "г.", "гг.", "им.", "проф.", "др.", "ул.", "стр.", "см.", "т.н.", "в.",
                "вв.", "акад.", "напр."}},
        {"fr", {"m.", "mme.", "mlle.", "dr.", "p.", "ex.", "etc.", "cf.", "av.", "st.", "ste.", "env."}},
        {"de", {"z.b.", "bzw.", "dr.", "prof.", "usw.", "nr.", "ca.", "d.h.", "u.a.", "vgl.", "str.", "hr.",
                "fr.", "jh."}},
        {"es", {"sr.", "sra.", "srta.", "dr.", "dra.", "etc.", "p.ej.", "ud.", "uds.", "av.", "núm."}},
        {"hy", {"տ.", "պ.", "դ.", "թ.", "էջ."}},
    };
    return table;
}

bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == U'։'; }

bool is_closer(char32_t c) {
    switch (c) {
        case U'"': case U'\'': case U')': case U']': case U'}':
        case U'»': case U'”': case U'’': case U'›':
            return true;
        default:
            return false;
    }
}

struct Range {
    std::size_t start;
    std::size_t end;
};

// Paragraph regions of `cps`, trimmed of surrounding whitespace.
std::vector<Range> paragraph_ranges(const std::u32string& cps) {
    std::vector<Range> out;
    const std::size_t n = cps.size();
    std::size_t i = 0;
    std::size_t para_start = SIZE_MAX;
    std::size_t last_non_space = 0;
    while (i < n) {
        if (!unicode::is_space(cps[i])) {
            if (para_start == SIZE_MAX) para_start = i;
            last_non_space = i;
            ++i;
            continue;
        }
        std::size_t j = i;
        int newlines = 0;
        while (j < n && unicode::is_space(cps[j])) {
            if (cps[j] == U'\n') ++newlines;
            ++j;
        }
        if (newlines >= 2 && para_start != SIZE_MAX) {
            out.push_back({para_start, last_non_space + 1});
            para_start = SIZE_MAX;
        }
        i = j;
    }
    if (para_start != SIZE_MAX) out.push_back({para_start, last_non_space + 1});
    return out;
}

std::vector<Range> sentence_ranges(const std::u32string& cps, Range para, const LangResources* res) {
    std::vector<Range> out;
    std::size_t start = para.start;
    std::size_t i = para.start;
    while (i < para.end) {
        if (!is_terminator(cps[i])) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < para.end && (is_terminator(cps[j]) || is_closer(cps[j]))) ++j;
        std::size_t k = j;
        while (k < para.end && unicode::is_space(cps[k])) ++k;
        const bool boundary = k > j && k < para.end && (unicode::is_upper(cps[k]) || unicode::is_digit(cps[k]));
        if (boundary && res && cps[i] == U'.' && !res->abbreviations.empty()) {
            std::size_t t = i;
            while (t > start && !unicode::is_space(cps[t - 1])) --t;
            auto token = unicode::fold_case(unicode::encode(std::u32string_view(cps).substr(t, i + 1 - t)));
            if (res->abbreviations.contains(token)) {
                i = j;
                continue;
            }
        }
        if (boundary) {
            out.push_back({start, j});
            start = k;
        }
        i = j;
    }
    if (start < para.end) out.push_back({start, para.end});
    return out;
}

std::string slice(const std::u32string& cps, Range r) {
    return unicode::encode(std::u32string_view(cps).substr(r.start, r.end - r.start));
}

}  // namespace

// ---------------------------------------------------------------------------
// Resources

LangResources LangResources::defaults(std::string_view lang) {
    LangResources r;
    r.lang = std::string(lang);
    const auto& table = builtin_abbreviations();
    if (auto it = table.find(lang); it != table.end()) r.abbreviations.insert(it->second.begin(), it->second.end());
    return r;
}

void LangResources::load_stopwords(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        stopwords.insert(unicode::fold_case(line));
    }
}

void LangResources::load_lemma_map(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = detail::split(line, '\t');
        if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
            throw ParseError("lemma map row needs surface<TAB>lemma", lineno);
        }
        lemma_map[unicode::fold_case(cols[0])] = unicode::fold_case(cols[1]);
    }
}

void LangResources::load_abbreviations(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) abbreviations.insert(unicode::fold_case(line));
    }
}

const LangResources& ResourceSet::get(std::string_view lang) const {
    if (auto it = by_lang_.find(lang); it != by_lang_.end()) return it->second;
    static const std::map<std::string, LangResources, std::less<>> builtin = [] {
        std::map<std::string, LangResources, std::less<>> m;
        for (const auto& [l, _] : builtin_abbreviations()) m.emplace(l, LangResources::defaults(l));
        return m;
    }();
    if (auto it = builtin.find(lang); it != builtin.end()) return it->second;
    static const LangResources empty;
    return empty;
}

LangResources& ResourceSet::at(std::string_view lang) {
    auto it = by_lang_.find(lang);
    if (it == by_lang_.end()) it = by_lang_.emplace(std::string(lang), LangResources::defaults(lang)).first;
    return it->second;
}

ResourceSet ResourceSet::load_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("resource directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    ResourceSet rs;
    for (const auto& p : files) {
        const std::string name = p.filename().string();
        const auto dot = name.find('.');
        if (dot == std::string::npos || dot == 0) continue;
        const std::string lang = name.substr(0, dot);
        const std::string suffix = name.substr(dot);
        std::ifstream in(p);
        if (!in) throw DataError("cannot open " + p.string());
        if (suffix == ".stopwords") rs.at(lang).load_stopwords(in);
        else if (suffix == ".lemmas.tsv") rs.at(lang).load_lemma_map(in);
        else if (suffix == ".abbrev") rs.at(lang).load_abbreviations(in);
    }
    return rs;
}

std::string ResourceSet::fingerprint() const {
    std::string buf;
    for (const auto& [lang, r] : by_lang_) {
        std::vector<std::string> sw(r.stopwords.begin(), r.stopwords.end());
        std::sort(sw.begin(), sw.end());
        std::vector<std::pair<std::string, std::string>> lm(r.lemma_map.begin(), r.lemma_map.end());
        std::sort(lm.begin(), lm.end());
        buf += "lang\t" + lang + "\n";
        for (const auto& s : sw) buf += "s\t" + s + "\n";
        for (const auto& [a, b] : lm) buf += "l\t" + a + "\t" + b + "\n";
        for (const auto& a : r.abbreviations) buf += "a\t" + a + "\n";
    }
    return sha256_hex(buf);
}

// ---------------------------------------------------------------------------
// Segmentation

std::vector<Fragment> segment(const Document& doc, FragmentKind kind, const LangResources* res) {
    const std::u32string cps = unicode::decode(doc.text);
    std::vector<Fragment> out;
    std::size_t ordinal = 0;
    for (const Range& para : paragraph_ranges(cps)) {
        if (kind == FragmentKind::Paragraph) {
            out.push_back({doc.id, kind, ordinal++, {para.start, para.end}, slice(cps, para)});
            continue;
        }
        for (const Range& s : sentence_ranges(cps, para, res)) {
            out.push_back({doc.id, kind, ordinal++, {s.start, s.end}, slice(cps, s)});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Normalization

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    const std::u32string cps = unicode::decode(text);
    const std::size_t n = cps.size();
    std::size_t i = 0;
    while (i < n) {
        while (i < n && unicode::is_space(cps[i])) ++i;
        std::size_t j = i;
        while (j < n && !unicode::is_space(cps[j])) ++j;
        if (i == j) break;
        std::size_t a = i;
        std::size_t b = j;
        while (a < b && unicode::is_punct(cps[a])) ++a;
        while (b > a && unicode::is_punct(cps[b - 1])) --b;
        for (std::size_t p = i; p < a; ++p) out.push_back(unicode::encode(std::u32string_view(&cps[p], 1)));
        if (a < b) out.push_back(unicode::encode(std::u32string_view(cps).substr(a, b - a)));
        for (std::size_t p = b; p < j; ++p) out.push_back(unicode::encode(std::u32string_view(&cps[p], 1)));
        i = j;
    }
    return out;
}

bool is_number_token(std::string_view token) {
    bool any_digit = false;
    for (char32_t c : unicode::decode(token)) {
        if (c == U'.' || c == U',' || c == U' ' || c == U' ' || c == U' ') continue;
        if (!unicode::is_digit(c)) return false;
        any_digit = true;
    }
    return any_digit;
}

bool has_punctuation(std::string_view token) {
    const auto cps = unicode::decode(token);
    return std::any_of(cps.begin(), cps.end(), [](char32_t c) { return unicode::is_punct(c); });
}

std::vector<std::string> normalize(std::string_view text, const LangResources& res) {
    std::vector<std::string> out;
    for (const auto& tok : tokenize(text)) {
        std::string folded = unicode::fold_case(tok);
        if (res.stopwords.contains(folded)) continue;
        std::string lemma = folded;
        if (auto it = res.lemma_map.find(folded); it != res.lemma_map.end()) lemma = it->second;
        if (res.stopwords.contains(lemma)) continue;
        if (is_number_token(lemma) || has_punctuation(lemma)) continue;
        out.push_back(std::move(lemma));
    }
    return out;
}

TermSequence conceptualize(std::span<const std::string> lemmas, std::string_view lang, const ClusterDictionary& dict) {
    TermSequence seq;
    seq.terms.reserve(lemmas.size());
    const bool all = dict.mode() == MergeMode::All;
    for (const auto& lemma : lemmas) {
        if (all) {
            auto ids = dict.lookup_all(lang, lemma);
            if (ids.empty()) seq.terms.push_back(lemma);
            else seq.terms.insert(seq.terms.end(), ids.begin(), ids.end());
        } else if (auto top = dict.lookup_top(lang, lemma)) {
            seq.terms.emplace_back(*top);
        } else {
            seq.terms.push_back(lemma);
        }
    }
    return seq;
}

TermSequence to_terms(std::string_view text, std::string_view lang, const ResourceSet& res,
                      const ClusterDictionary& dict) {
    const auto lemmas = normalize(text, res.get(lang));
    return conceptualize(lemmas, lang, dict);
}

}  // namespace clpd
