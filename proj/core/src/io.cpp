#include "clpd/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "clpd/error.hpp"
#include "text_util.hpp"

namespace clpd::io {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

std::vector<Document> read_corpus(std::istream& in) {
    std::vector<Document> docs;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        Document d;
        try {
            auto j = nlohmann::json::parse(line);
            d.id = j.at("id").get<std::string>();
            d.lang = j.at("lang").get<std::string>();
            d.text = j.at("text").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad corpus record: ") + e.what(), lineno);
        }
        if (d.id.empty()) throw ParseError("empty document id", lineno);
        if (!ids.insert(d.id).second) throw ParseError("duplicate document id '" + d.id + "'", lineno);
        docs.push_back(std::move(d));
    }
    return docs;
}

std::vector<Document> read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return read_corpus(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string corpus_to_jsonl(const std::vector<Document>& docs) {
    std::string out;
    for (const auto& d : docs) {
        nlohmann::ordered_json j;
        j["id"] = d.id;
        j["lang"] = d.lang;
        j["text"] = d.text;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

namespace {

Span span_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw DataError("span must be [start, end]");
    Span s{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
    if (s.start > s.end) throw DataError("span start after end");
    return s;
}

}  // namespace

std::vector<GoldAnnotation> gold_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw DataError("gold file must hold a JSON array");
    std::vector<GoldAnnotation> out;
    try {
        for (const auto& g : j) {
            out.push_back({g.at("susp_doc").get<std::string>(), span_from_json(g.at("susp_span")),
                           g.at("src_doc").get<std::string>(), span_from_json(g.at("src_span"))});
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad gold annotation: ") + e.what());
    }
    return out;
}

nlohmann::json gold_to_json(const std::vector<GoldAnnotation>& gold) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& g : gold) {
        arr.push_back({{"susp_doc", g.susp_doc},
                       {"susp_span", {g.susp_span.start, g.susp_span.end}},
                       {"src_doc", g.src_doc},
                       {"src_span", {g.src_span.start, g.src_span.end}}});
    }
    return arr;
}

std::vector<ParallelPair> read_parallel(std::istream& in) {
    std::vector<ParallelPair> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cols = detail::split(line, '\t');
        if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
            throw ParseError("parallel corpus row needs l1<TAB>l2", lineno);
        }
        out.push_back({std::string(cols[0]), std::string(cols[1])});
    }
    return out;
}

std::vector<PairExample> read_pairs(std::istream& in) {
    std::vector<PairExample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        try {
            auto j = nlohmann::json::parse(line);
            const int label = j.at("label").get<int>();
            if (label != 0 && label != 1) throw ParseError("label must be 0 or 1", lineno);
            out.push_back({j.at("a").get<std::string>(), j.at("la").get<std::string>(), j.at("b").get<std::string>(),
                           j.at("lb").get<std::string>(), label == 1});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad pair record: ") + e.what(), lineno);
        }
    }
    return out;
}

std::string pairs_to_jsonl(const std::vector<PairExample>& pairs) {
    std::string out;
    for (const auto& p : pairs) {
        nlohmann::ordered_json j;
        j["a"] = p.a;
        j["la"] = p.la;
        j["b"] = p.b;
        j["lb"] = p.lb;
        j["label"] = p.translation ? 1 : 0;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace clpd::io
