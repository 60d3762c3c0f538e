#pragma once

// File formats shared by the CLI and the test harnesses.

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clpd/evalkit.hpp"
#include "clpd/textproc.hpp"

namespace clpd::io {

std::string read_file(const std::filesystem::path& path);
/// Writes atomically-enough for our purposes: truncate + write + check.
void write_file(const std::filesystem::path& path, std::string_view data);

/// {"id": str, "lang": str, "text": str} per line. Duplicate ids are rejected.
std::vector<Document> read_corpus(std::istream& in);
std::vector<Document> read_corpus(const std::filesystem::path& path);
std::string corpus_to_jsonl(const std::vector<Document>& docs);

/// [{"susp_doc", "susp_span": [s, e], "src_doc", "src_span": [s, e]}]
std::vector<GoldAnnotation> gold_from_json(const nlohmann::json& j);
nlohmann::json gold_to_json(const std::vector<GoldAnnotation>& gold);

/// l1_text<TAB>l2_text per line.
std::vector<ParallelPair> read_parallel(std::istream& in);

/// {"a", "la", "b", "lb", "label": 0|1} per line.
std::vector<PairExample> read_pairs(std::istream& in);
std::string pairs_to_jsonl(const std::vector<PairExample>& pairs);

/// Stable JSON text: sorted keys, 2-space indent, trailing newline.
std::string dump(const nlohmann::json& j);

}  // namespace clpd::io
