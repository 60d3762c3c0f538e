#include "clpd/index.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clpd/error.hpp"
#include "text_util.hpp"

namespace clpd {

namespace {

constexpr std::string_view kMagic = "clpd-index";
constexpr int kFormatVersion = 1;

std::string fmt_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double parse_double(std::string_view s, std::size_t lineno) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError("bad number '" + std::string(s) + "'", lineno);
    return v;
}

std::uint64_t parse_uint(std::string_view s, std::size_t lineno) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError("bad integer '" + std::string(s) + "'", lineno);
    return v;
}

bool better(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.fragment < b.fragment;
}

}  // namespace

std::string_view to_string(IdfVariant v) { return v == IdfVariant::NonNegative ? "nonneg" : "classic"; }

IdfVariant parse_idf_variant(std::string_view s) {
    if (s == "nonneg") return IdfVariant::NonNegative;
    if (s == "classic") return IdfVariant::Classic;
    throw DataError("unknown idf variant: " + std::string(s));
}

void RetrievalConfig::validate() const {
    if (!(k1 > 0.0)) throw DataError("k1 must be > 0");
    if (!(b >= 0.0 && b <= 1.0)) throw DataError("b must be in [0, 1]");
}

double bm25_idf(std::size_t n_fragments, std::size_t doc_freq, IdfVariant variant) {
    const double n = static_cast<double>(n_fragments);
    const double df = static_cast<double>(doc_freq);
    const double ratio = (n - df + 0.5) / (df + 0.5);
    return variant == IdfVariant::NonNegative ? std::log(1.0 + ratio) : std::log(ratio);
}

FragmentRef InvertedIndex::add_fragment(FragmentMeta meta, const TermSequence& terms) {
    if (sealed_) throw UsageError("add_fragment on a sealed index");
    if (meta_.size() >= UINT32_MAX) throw UsageError("index is full");
    const auto ref = static_cast<FragmentRef>(meta_.size());

    std::map<std::uint32_t, std::uint32_t> tf;
    for (const auto& t : terms.terms) {
        auto [it, inserted] = term_ids_.emplace(t, static_cast<std::uint32_t>(terms_.size()));
        if (inserted) {
            terms_.push_back(t);
            postings_.emplace_back();
        }
        ++tf[it->second];
    }
    for (const auto& [id, count] : tf) postings_[id].push_back({ref, count});

    lengths_.push_back(static_cast<std::uint32_t>(terms.terms.size()));
    meta_.push_back(std::move(meta));
    return ref;
}

void InvertedIndex::seal() {
    if (sealed_) throw UsageError("index already sealed");
    double total = 0.0;
    for (auto l : lengths_) total += l;
    avgdl_ = lengths_.empty() ? 0.0 : total / static_cast<double>(lengths_.size());
    sealed_ = true;
}

void InvertedIndex::require_sealed() const {
    if (!sealed_) throw UsageError("index is not sealed");
}

std::uint32_t InvertedIndex::length(FragmentRef ref) const {
    if (ref >= lengths_.size()) throw DataError("unknown fragment ref " + std::to_string(ref));
    return lengths_[ref];
}

const FragmentMeta& InvertedIndex::meta(FragmentRef ref) const {
    if (ref >= meta_.size()) throw DataError("unknown fragment ref " + std::to_string(ref));
    return meta_[ref];
}

std::size_t InvertedIndex::doc_freq(std::string_view term) const { return postings(term).size(); }

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) return {};
    return postings_[it->second];
}

const std::string* InvertedIndex::attribute(const std::string& key) const {
    auto it = attrs_.find(key);
    return it == attrs_.end() ? nullptr : &it->second;
}

std::vector<std::string> InvertedIndex::unique_sorted(std::span<const std::string> terms) {
    std::vector<std::string> q(terms.begin(), terms.end());
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());
    return q;
}

double InvertedIndex::term_weight(const Posting& p, double idf, const RetrievalConfig& cfg) const {
    const double tf = p.tf;
    const double norm = 1.0 - cfg.b + cfg.b * static_cast<double>(lengths_[p.fragment]) / avgdl_;
    return idf * tf * (cfg.k1 + 1.0) / (tf + cfg.k1 * norm);
}

double InvertedIndex::bm25_score(FragmentRef ref, std::span<const std::string> query, const RetrievalConfig& cfg) const {
    require_sealed();
    if (ref >= meta_.size()) throw DataError("unknown fragment ref " + std::to_string(ref));
    double score = 0.0;
    for (const auto& t : unique_sorted(query)) {
        auto plist = postings(t);
        auto it = std::lower_bound(plist.begin(), plist.end(), ref,
                                   [](const Posting& p, FragmentRef r) { return p.fragment < r; });
        if (it == plist.end() || it->fragment != ref) continue;
        score += term_weight(*it, bm25_idf(meta_.size(), plist.size(), cfg.idf), cfg);
    }
    return score;
}

std::vector<Candidate> InvertedIndex::search(const TermSequence& query, const RetrievalConfig& cfg) const {
    require_sealed();
    cfg.validate();
    if (cfg.top_k == 0 || query.terms.empty() || meta_.empty()) return {};

    // Term-at-a-time accumulation in sorted term order, matching bm25_score.
    std::vector<double> acc(meta_.size(), 0.0);
    std::vector<FragmentRef> touched;
    std::vector<char> seen(meta_.size(), 0);
    for (const auto& t : unique_sorted(query.terms)) {
        auto plist = postings(t);
        if (plist.empty()) continue;
        const double idf = bm25_idf(meta_.size(), plist.size(), cfg.idf);
        for (const auto& p : plist) {
            acc[p.fragment] += term_weight(p, idf, cfg);
            if (!seen[p.fragment]) {
                seen[p.fragment] = 1;
                touched.push_back(p.fragment);
            }
        }
    }

    std::vector<Candidate> out;
    out.reserve(touched.size());
    for (auto ref : touched) {
        if (acc[ref] > 0.0) out.push_back({ref, acc[ref]});
    }
    const std::size_t k = std::min(cfg.top_k, out.size());
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end(), better);
    out.resize(k);
    return out;
}

// ---------------------------------------------------------------------------
// Persistence
//
//   clpd-index  1
//   fragments   N
//   avgdl       x
//   config      k1  b  K  idf
//   attr        key value          (0+ lines, sorted by key)
//   terms       T
//   term  df  ref:tf ref:tf ...    (T lines, term-id order)
//   {"doc":..,"ord":..,"span":[s,e],"len":..,"text":..}   (N lines)
//   end

void InvertedIndex::save(std::ostream& out) const {
    require_sealed();
    out << kMagic << '\t' << kFormatVersion << '\n';
    out << "fragments\t" << meta_.size() << '\n';
    out << "avgdl\t" << fmt_double(avgdl_) << '\n';
    out << "config\t" << fmt_double(config_.k1) << '\t' << fmt_double(config_.b) << '\t' << config_.top_k << '\t'
        << to_string(config_.idf) << '\n';
    for (const auto& [k, v] : attrs_) out << "attr\t" << k << '\t' << v << '\n';
    out << "terms\t" << terms_.size() << '\n';
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        out << terms_[i] << '\t' << postings_[i].size() << '\t';
        bool first = true;
        for (const auto& p : postings_[i]) {
            if (!first) out << ' ';
            first = false;
            out << p.fragment << ':' << p.tf;
        }
        out << '\n';
    }
    for (std::size_t i = 0; i < meta_.size(); ++i) {
        nlohmann::ordered_json j;
        j["doc"] = meta_[i].doc_id;
        j["ord"] = meta_[i].ordinal;
        j["span"] = {meta_[i].span.start, meta_[i].span.end};
        j["len"] = lengths_[i];
        j["text"] = meta_[i].text;
        out << j.dump() << '\n';
    }
    out << "end\n";
}

InvertedIndex InvertedIndex::load(std::istream& in) {
    InvertedIndex idx;
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() -> std::vector<std::string_view> {
        if (!std::getline(in, line)) throw ParseError("unexpected end of index file", lineno + 1);
        ++lineno;
        return detail::split(line, '\t');
    };
    auto expect = [&](std::string_view tag, std::size_t ncols) {
        auto cols = next();
        if (cols.empty() || cols[0] != tag || cols.size() != ncols) {
            throw ParseError("expected '" + std::string(tag) + "' record", lineno);
        }
        return cols;
    };

    auto head = expect(kMagic, 2);
    if (parse_uint(head[1], lineno) != kFormatVersion) throw ParseError("unsupported index version", lineno);
    const auto n = parse_uint(expect("fragments", 2)[1], lineno);
    const double stored_avgdl = parse_double(expect("avgdl", 2)[1], lineno);
    auto cfg = expect("config", 5);
    idx.config_.k1 = parse_double(cfg[1], lineno);
    idx.config_.b = parse_double(cfg[2], lineno);
    idx.config_.top_k = parse_uint(cfg[3], lineno);
    idx.config_.idf = parse_idf_variant(cfg[4]);

    auto cols = next();
    while (!cols.empty() && cols[0] == "attr") {
        if (cols.size() != 3) throw ParseError("bad attr record", lineno);
        idx.attrs_[std::string(cols[1])] = std::string(cols[2]);
        cols = next();
    }
    if (cols.size() != 2 || cols[0] != "terms") throw ParseError("expected 'terms' record", lineno);
    const auto nterms = parse_uint(cols[1], lineno);
    idx.terms_.reserve(nterms);
    idx.postings_.reserve(nterms);
    for (std::uint64_t t = 0; t < nterms; ++t) {
        auto tc = next();
        if (tc.size() != 3) throw ParseError("bad term record", lineno);
        std::vector<Posting> plist;
        const auto df = parse_uint(tc[1], lineno);
        plist.reserve(df);
        for (auto item : detail::split(tc[2], ' ')) {
            if (item.empty()) continue;
            auto colon = item.find(':');
            if (colon == std::string_view::npos) throw ParseError("bad posting", lineno);
            Posting p{static_cast<FragmentRef>(parse_uint(item.substr(0, colon), lineno)),
                      static_cast<std::uint32_t>(parse_uint(item.substr(colon + 1), lineno))};
            if (p.fragment >= n || p.tf == 0) throw ParseError("posting out of range", lineno);
            if (!plist.empty() && plist.back().fragment >= p.fragment) throw ParseError("postings not sorted", lineno);
            plist.push_back(p);
        }
        if (plist.size() != df) throw ParseError("document frequency mismatch", lineno);
        const std::string term(tc[0]);
        if (!idx.term_ids_.emplace(term, static_cast<std::uint32_t>(idx.terms_.size())).second) {
            throw ParseError("duplicate term", lineno);
        }
        idx.terms_.push_back(term);
        idx.postings_.push_back(std::move(plist));
    }
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw ParseError("unexpected end of index file", lineno + 1);
        ++lineno;
        try {
            auto j = nlohmann::json::parse(line);
            FragmentMeta m;
            m.doc_id = j.at("doc").get<std::string>();
            m.ordinal = j.at("ord").get<std::size_t>();
            m.span = {j.at("span").at(0).get<std::size_t>(), j.at("span").at(1).get<std::size_t>()};
            m.text = j.at("text").get<std::string>();
            idx.lengths_.push_back(j.at("len").get<std::uint32_t>());
            idx.meta_.push_back(std::move(m));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad fragment record: ") + e.what(), lineno);
        }
    }
    if (next()[0] != "end") throw ParseError("missing end marker", lineno);

    idx.seal();
    if (idx.avgdl_ != stored_avgdl) throw ParseError("avgdl does not match fragment lengths");
    return idx;
}

}  // namespace clpd
