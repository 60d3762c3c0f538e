#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "clpd/analysis.hpp"
#include "clpd/error.hpp"
#include "clpd/evalkit.hpp"
#include "clpd/index.hpp"
#include "clpd/io.hpp"
#include "clpd/pipeline.hpp"
#include "clpd/remote_scorer.hpp"
#include "clpd/textproc.hpp"
#include "clpd/thesaurus.hpp"
#include "clpd/unicode.hpp"

#ifndef CLPD_VERSION
#define CLPD_VERSION "0.0.0"
#endif

namespace clpd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
    std::vector<std::string> argv;
    std::ostream& out;
    std::ostream& err;
    bool progress = false;
};

void emit_progress(Context& ctx, const std::string& stage, std::size_t done, std::size_t total) {
    if (!ctx.progress) return;
    ctx.err << json{{"event", "progress"}, {"stage", stage}, {"done", done}, {"total", total}}.dump() << '\n';
}

void write_manifest(const fs::path& path, const std::string& subcommand, const Context& ctx, const json& config) {
    json m = {{"tool", "clpd"},
              {"version", CLPD_VERSION},
              {"subcommand", subcommand},
              {"argv", ctx.argv},
              {"config", config}};
    io::write_file(path, io::dump(m));
}

fs::path manifest_path_for(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

ClusterDictionary load_dictionary(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open dictionary " + p.string());
    return ClusterDictionary::from_tsv(in);
}

ResourceSet load_resources(const std::string& dir) {
    return dir.empty() ? ResourceSet{} : ResourceSet::load_dir(dir);
}

InvertedIndex load_index(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open index " + p.string());
    return InvertedIndex::load(in);
}

struct ScorerOptions {
    std::string name = "overlap";
    long timeout_ms = 30000;
    std::size_t batch_size = 64;
    std::size_t max_in_flight = 1;
};

std::unique_ptr<Scorer> make_scorer(const ScorerOptions& o, const ClusterDictionary& dict, const ResourceSet& res) {
    if (o.name == "overlap") return std::make_unique<OverlapScorer>(dict, res);
    if (o.name.rfind("remote:", 0) == 0) {
        auto opts = RemoteScorer::parse_address(o.name.substr(7));
        opts.timeout = std::chrono::milliseconds(o.timeout_ms);
        opts.batch_size = o.batch_size;
        opts.max_in_flight = o.max_in_flight;
        return std::make_unique<RemoteScorer>(opts);
    }
    throw CLI::ValidationError("--scorer", "expected 'overlap' or 'remote:<host:port>'");
}

void add_scorer_options(CLI::App* cmd, ScorerOptions& o) {
    cmd->add_option("--scorer", o.name, "overlap | remote:<host:port>")->capture_default_str();
    cmd->add_option("--timeout-ms", o.timeout_ms, "Remote scorer timeout")->capture_default_str();
    cmd->add_option("--batch-size", o.batch_size, "Remote scorer batch size")->capture_default_str();
    cmd->add_option("--max-in-flight", o.max_in_flight, "Concurrent remote batches")->capture_default_str();
}

json scorer_json(const ScorerOptions& o) {
    return {{"scorer", o.name}, {"timeout_ms", o.timeout_ms}, {"batch_size", o.batch_size},
            {"max_in_flight", o.max_in_flight}};
}

json retrieval_json(const RetrievalConfig& c) {
    return {{"k", c.top_k}, {"k1", c.k1}, {"b", c.b}, {"idf", std::string(to_string(c.idf))}};
}

std::vector<double> parse_k_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

std::string format_k(std::size_t k) { return std::to_string(k); }

// ---------------------------------------------------------------------------

struct BuildClustersArgs {
    std::vector<std::string> senses;
    std::vector<std::string> translations;
    std::string mode = "top1";
    std::string out;
};

int cmd_build_clusters(Context& ctx, const BuildClustersArgs& a) {
    std::vector<SenseRecord> records;
    std::size_t unknown_pos = 0;
    for (const auto& p : a.senses) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw DataError("cannot open " + p);
        try {
            auto r = load_senses(in);
            unknown_pos += r.unknown_pos;
            std::move(r.records.begin(), r.records.end(), std::back_inserter(records));
        } catch (const ParseError& e) {
            throw ParseError(p + ": " + e.what());
        }
    }
    BuildReport br;
    auto dict = build_clusters(records, parse_merge_mode(a.mode), &br);
    AugmentReport ar;
    for (const auto& p : a.translations) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw DataError("cannot open " + p);
        const auto rows = load_translations(in);
        AugmentReport step;
        dict = augment_clusters(dict, rows, &step);
        ar.added += step.added;
        ar.skipped_no_anchor += step.skipped_no_anchor;
    }
    io::write_file(a.out, dict.to_tsv());
    write_manifest(manifest_path_for(a.out), "build-clusters", ctx,
                   {{"senses", a.senses}, {"translations", a.translations}, {"mode", a.mode}, {"out", a.out}});
    ctx.out << json{{"records", records.size()},
                    {"unknown_pos", unknown_pos},
                    {"anchors", br.anchors},
                    {"clusters", dict.cluster_count()},
                    {"concepts_without_anchor", br.concepts_without_anchor},
                    {"translations_added", ar.added},
                    {"translations_skipped", ar.skipped_no_anchor},
                    {"fingerprint", dict.fingerprint()}}
                   .dump()
            << '\n';
    return kExitOk;
}

struct CoverageArgs {
    std::string dict;
    std::string corpus;
    std::string resources;
};

int cmd_coverage(Context& ctx, const CoverageArgs& a) {
    const auto dict = load_dictionary(a.dict);
    const auto res = load_resources(a.resources);
    std::vector<LangToken> tokens;
    for (const auto& doc : io::read_corpus(a.corpus)) {
        for (auto& l : normalize(doc.text, res.get(doc.lang))) tokens.push_back({doc.lang, std::move(l)});
    }
    ctx.out << json{{"coverage", coverage(dict, tokens)}, {"tokens", tokens.size()}}.dump() << '\n';
    return kExitOk;
}

struct IndexArgs {
    std::string dict;
    std::string reference;
    std::string resources;
    std::string out;
    RetrievalConfig cfg;
    std::string idf = "nonneg";
};

int cmd_index(Context& ctx, IndexArgs a) {
    a.cfg.idf = parse_idf_variant(a.idf);
    const auto dict = load_dictionary(a.dict);
    const auto res = load_resources(a.resources);
    const auto docs = io::read_corpus(a.reference);
    const auto index = index_reference(docs, dict, res, a.cfg);
    std::ostringstream ss;
    index.save(ss);
    io::write_file(a.out, ss.str());
    write_manifest(manifest_path_for(a.out), "index", ctx,
                   {{"dict", a.dict}, {"reference", a.reference}, {"resources", a.resources}, {"out", a.out},
                    {"retrieval", retrieval_json(a.cfg)}});
    ctx.out << json{{"fragments", index.size()}, {"terms", index.term_count()}, {"avgdl", index.avgdl()}}.dump()
            << '\n';
    return kExitOk;
}

double read_threshold_file(const std::string& path) {
    auto j = json::parse(io::read_file(path));
    return j.at("threshold").get<double>();
}

struct DetectArgs {
    std::string index;
    std::string dict;
    std::string suspicious;
    std::string resources;
    std::string out;
    std::string trace;
    std::optional<double> threshold;
    std::string threshold_file;
    std::optional<std::size_t> k;
    std::optional<double> k1;
    std::optional<double> b;
    bool merge_adjacent = false;
    unsigned jobs = 0;
    ScorerOptions scorer;
};

int cmd_detect(Context& ctx, const DetectArgs& a) {
    double threshold = 0.0;
    if (a.threshold) threshold = *a.threshold;
    else if (!a.threshold_file.empty()) threshold = read_threshold_file(a.threshold_file);
    else throw CLI::RequiredError("--threshold or --threshold-file");

    const auto index = load_index(a.index);
    const auto dict = load_dictionary(a.dict);
    const auto res = load_resources(a.resources);
    const auto docs = io::read_corpus(a.suspicious);
    auto scorer = make_scorer(a.scorer, dict, res);

    DetectConfig cfg;
    cfg.retrieval = index.config();
    if (a.k) cfg.retrieval.top_k = *a.k;
    if (a.k1) cfg.retrieval.k1 = *a.k1;
    if (a.b) cfg.retrieval.b = *a.b;
    cfg.threshold = threshold;
    cfg.merge_adjacent = a.merge_adjacent;

    const unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
    Detector detector(index, dict, res, *scorer, cfg);
    std::vector<TraceEntry> trace;
    const auto report = detector.detect_all(docs, jobs, a.trace.empty() ? nullptr : &trace,
                                            [&](std::size_t d, std::size_t n) { emit_progress(ctx, "detect", d, n); });

    io::write_file(a.out, io::dump(report.to_json()));
    if (!a.trace.empty()) {
        std::string lines;
        for (const auto& t : trace) lines += t.to_json(index).dump() + "\n";
        io::write_file(a.trace, lines);
    }
    json mcfg = {{"index", a.index}, {"dict", a.dict}, {"suspicious", a.suspicious}, {"resources", a.resources},
                 {"out", a.out}, {"trace", a.trace}, {"threshold", threshold}, {"merge_adjacent", a.merge_adjacent},
                 {"retrieval", retrieval_json(cfg.retrieval)}, {"jobs", jobs}};
    mcfg.update(scorer_json(a.scorer));
    write_manifest(manifest_path_for(a.out), "detect", ctx, mcfg);
    ctx.out << json{{"documents", docs.size()}, {"detections", report.detections.size()}}.dump() << '\n';
    return kExitOk;
}

struct EvalArgs {
    std::string mode = "detection";
    std::string report;
    std::string gold;
    std::string suspicious;
    std::string index;
    std::string dict;
    std::string resources;
    std::string pairs;
    std::string ks = "1,5,10,50";
    std::optional<double> threshold;
    std::string threshold_file;
    std::string out;
    ScorerOptions scorer;
};

int cmd_eval(Context& ctx, const EvalArgs& a) {
    json result;
    if (a.mode == "detection") {
        if (a.report.empty() || a.gold.empty()) throw CLI::RequiredError("--report and --gold");
        const auto report = Report::from_json(json::parse(io::read_file(a.report)));
        const auto gold = io::gold_from_json(json::parse(io::read_file(a.gold)));
        std::map<std::string, std::size_t> lengths;
        if (!a.suspicious.empty()) {
            for (const auto& d : io::read_corpus(a.suspicious)) lengths[d.id] = unicode::length(d.text);
        }
        const auto m = char_pr(report.detections, gold, a.suspicious.empty() ? nullptr : &lengths);
        result = {{"recall", m.recall}, {"precision", m.precision}, {"f1", m.f1}};
    } else if (a.mode == "retrieval") {
        if (a.index.empty() || a.dict.empty() || a.suspicious.empty() || a.gold.empty()) {
            throw CLI::RequiredError("--index, --dict, --suspicious and --gold");
        }
        const auto index = load_index(a.index);
        const auto dict = load_dictionary(a.dict);
        const auto res = load_resources(a.resources);
        const auto docs = io::read_corpus(a.suspicious);
        const auto gold = io::gold_from_json(json::parse(io::read_file(a.gold)));
        if (const auto* fp = index.attribute(kAttrDictionary); fp && *fp != dict.fingerprint()) {
            throw DataError("dictionary fingerprint does not match the index");
        }
        std::size_t max_k = 0;
        std::vector<std::size_t> ks;
        for (double k : parse_k_list(a.ks)) {
            ks.push_back(static_cast<std::size_t>(k));
            max_k = std::max(max_k, ks.back());
        }
        auto cfg = index.config();
        cfg.top_k = max_k;
        const auto q = run_retrieval_queries(docs, gold, index, dict, res, cfg);
        json at = json::object();
        for (auto k : ks) at[format_k(k)] = recall_at_k(q.results, q.gold, k);
        result = {{"recall_at", at}, {"queries", q.results.size()}};
    } else if (a.mode == "pairs") {
        if (a.pairs.empty()) throw CLI::RequiredError("--pairs");
        double threshold = 0.5;
        if (a.threshold) threshold = *a.threshold;
        else if (!a.threshold_file.empty()) threshold = read_threshold_file(a.threshold_file);
        else throw CLI::RequiredError("--threshold or --threshold-file");
        const auto dict = a.dict.empty() ? ClusterDictionary{} : load_dictionary(a.dict);
        const auto res = load_resources(a.resources);
        auto scorer = make_scorer(a.scorer, dict, res);
        std::ifstream in(a.pairs, std::ios::binary);
        if (!in) throw DataError("cannot open " + a.pairs);
        const auto examples = io::read_pairs(in);
        const auto m = pair_metrics(examples, *scorer, threshold);
        result = {{"recall", m.recall}, {"precision", m.precision}, {"f1", m.f1}};
    } else {
        throw CLI::ValidationError("--mode", "expected detection, retrieval or pairs");
    }

    if (!a.out.empty()) {
        io::write_file(a.out, io::dump(result));
        json mcfg = {{"mode", a.mode}, {"report", a.report}, {"gold", a.gold}, {"suspicious", a.suspicious},
                     {"index", a.index}, {"dict", a.dict}, {"resources", a.resources}, {"pairs", a.pairs},
                     {"ks", a.ks}, {"out", a.out}};
        mcfg.update(scorer_json(a.scorer));
        write_manifest(manifest_path_for(a.out), "eval", ctx, mcfg);
    }
    ctx.out << result.dump() << '\n';
    return kExitOk;
}

struct GenArgs {
    std::string hosts;
    std::string parallel;
    std::string out_dir;
    GenConfig cfg;
};

int cmd_gen(Context& ctx, const GenArgs& a) {
    const auto hosts = io::read_corpus(a.hosts);
    std::ifstream in(a.parallel, std::ios::binary);
    if (!in) throw DataError("cannot open " + a.parallel);
    const auto parallel = io::read_parallel(in);
    const auto ds = generate_dataset(hosts, parallel, a.cfg);
    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    io::write_file(dir / "suspicious.jsonl", io::corpus_to_jsonl(ds.suspicious));
    io::write_file(dir / "reference.jsonl", io::corpus_to_jsonl(ds.reference));
    io::write_file(dir / "gold.json", io::dump(io::gold_to_json(ds.gold)));
    write_manifest(dir / "manifest.json", "gen", ctx,
                   {{"hosts", a.hosts}, {"parallel", a.parallel}, {"out_dir", a.out_dir}, {"seed", a.cfg.seed},
                    {"min_fraction", a.cfg.min_fraction}, {"max_fraction", a.cfg.max_fraction},
                    {"min_sources", a.cfg.min_sources}, {"max_sources", a.cfg.max_sources},
                    {"suspicious_docs", a.cfg.suspicious_docs}, {"reference_docs", a.cfg.reference_docs},
                    {"filler_paragraphs", a.cfg.filler_paragraphs},
                    {"sentences_per_filler", a.cfg.sentences_per_filler}, {"l1_lang", a.cfg.l1_lang}});
    ctx.out << json{{"suspicious", ds.suspicious.size()}, {"reference", ds.reference.size()},
                    {"annotations", ds.gold.size()}}
                   .dump()
            << '\n';
    return kExitOk;
}

struct PairsArgs {
    std::string parallel;
    std::string out;
    std::size_t negatives = 1;
    std::uint64_t seed = 1;
    std::string l1 = "en";
    std::string l2;
};

int cmd_pairs(Context& ctx, const PairsArgs& a) {
    std::ifstream in(a.parallel, std::ios::binary);
    if (!in) throw DataError("cannot open " + a.parallel);
    const auto pairs = build_pair_dataset(io::read_parallel(in), a.negatives, a.seed, a.l1, a.l2);
    io::write_file(a.out, io::pairs_to_jsonl(pairs));
    write_manifest(manifest_path_for(a.out), "pairs", ctx,
                   {{"parallel", a.parallel}, {"out", a.out}, {"negatives", a.negatives}, {"seed", a.seed},
                    {"l1", a.l1}, {"l2", a.l2}});
    ctx.out << json{{"examples", pairs.size()}}.dump() << '\n';
    return kExitOk;
}

struct CalibrateArgs {
    std::string pairs;
    std::string dict;
    std::string resources;
    std::string out;
    double beta = 0.25;
    ScorerOptions scorer;
};

int cmd_calibrate(Context& ctx, const CalibrateArgs& a) {
    const auto dict = a.dict.empty() ? ClusterDictionary{} : load_dictionary(a.dict);
    const auto res = load_resources(a.resources);
    auto scorer = make_scorer(a.scorer, dict, res);
    std::ifstream in(a.pairs, std::ios::binary);
    if (!in) throw DataError("cannot open " + a.pairs);
    const auto examples = io::read_pairs(in);
    std::vector<PairText> batch;
    for (const auto& e : examples) batch.push_back({e.a, e.la, e.b, e.lb});
    const auto scores = score_pairs(*scorer, batch);
    std::vector<LabeledScore> dev;
    for (std::size_t i = 0; i < scores.size(); ++i) dev.push_back({scores[i], examples[i].translation});
    const auto t = calibrate(dev, a.beta);
    const json result = {{"threshold", t.value}, {"beta", t.beta}, {"f_beta", t.f_beta}, {"scorer", scorer->id()}};
    io::write_file(a.out, io::dump(result));
    json mcfg = {{"pairs", a.pairs}, {"dict", a.dict}, {"resources", a.resources}, {"out", a.out}, {"beta", a.beta}};
    mcfg.update(scorer_json(a.scorer));
    write_manifest(manifest_path_for(a.out), "calibrate", ctx, mcfg);
    ctx.out << result.dump() << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Context ctx{args, out, err};

    CLI::App app{"Cross-lingual plagiarism detection toolkit", "clpd"};
    app.set_version_flag("--version", std::string(CLPD_VERSION));
    app.require_subcommand(1);
    app.add_flag("--progress", ctx.progress, "JSON-lines progress on stderr");

    std::function<int()> action;

    BuildClustersArgs bc;
    auto* c_bc = app.add_subcommand("build-clusters", "Compile multilingual word clusters");
    c_bc->add_option("--senses", bc.senses, "Sense TSV file(s)")->required()->expected(1, -1);
    c_bc->add_option("--mode", bc.mode, "Merge strategy")->check(CLI::IsMember({"all", "top1"}))->capture_default_str();
    c_bc->add_option("--translations", bc.translations, "Translation table TSV file(s)")->expected(0, -1);
    c_bc->add_option("--out", bc.out, "Compiled dictionary TSV")->required();
    c_bc->callback([&] { action = [&] { return cmd_build_clusters(ctx, bc); }; });

    CoverageArgs cv;
    auto* c_cv = app.add_subcommand("coverage", "Lexical coverage of a dictionary over a corpus");
    c_cv->add_option("--dict", cv.dict)->required();
    c_cv->add_option("--corpus", cv.corpus, "Corpus JSONL")->required();
    c_cv->add_option("--resources", cv.resources, "Directory of language resources");
    c_cv->callback([&] { action = [&] { return cmd_coverage(ctx, cv); }; });

    IndexArgs ix;
    auto* c_ix = app.add_subcommand("index", "Index a reference collection");
    c_ix->add_option("--dict", ix.dict)->required();
    c_ix->add_option("--reference", ix.reference, "Reference corpus JSONL")->required();
    c_ix->add_option("--resources", ix.resources, "Directory of language resources");
    c_ix->add_option("--out", ix.out)->required();
    c_ix->add_option("--k", ix.cfg.top_k, "Candidates per query")->capture_default_str();
    c_ix->add_option("--k1", ix.cfg.k1, "BM25 k1")->capture_default_str();
    c_ix->add_option("--b", ix.cfg.b, "BM25 b")->capture_default_str();
    c_ix->add_option("--idf", ix.idf, "nonneg | classic")->check(CLI::IsMember({"nonneg", "classic"}))->capture_default_str();
    c_ix->callback([&] { action = [&] { return cmd_index(ctx, ix); }; });

    DetectArgs dt;
    auto* c_dt = app.add_subcommand("detect", "Detect cross-lingual plagiarism");
    c_dt->add_option("--index", dt.index)->required();
    c_dt->add_option("--dict", dt.dict)->required();
    c_dt->add_option("--suspicious", dt.suspicious, "Suspicious corpus JSONL")->required();
    c_dt->add_option("--resources", dt.resources, "Directory of language resources");
    c_dt->add_option("--out", dt.out, "Report JSON")->required();
    c_dt->add_option("--trace", dt.trace, "Per-sentence candidate trace JSONL");
    c_dt->add_option("--threshold", dt.threshold, "Translation decision threshold");
    c_dt->add_option("--threshold-file", dt.threshold_file, "Threshold JSON written by calibrate");
    c_dt->add_option("--k", dt.k, "Override candidates per query");
    c_dt->add_option("--k1", dt.k1, "Override BM25 k1");
    c_dt->add_option("--b", dt.b, "Override BM25 b");
    c_dt->add_flag("--merge-adjacent", dt.merge_adjacent, "Merge consecutive detections into one source paragraph");
    c_dt->add_option("--jobs", dt.jobs, "Worker threads (0 = all cores)");
    add_scorer_options(c_dt, dt.scorer);
    c_dt->callback([&] { action = [&] { return cmd_detect(ctx, dt); }; });

    EvalArgs ev;
    auto* c_ev = app.add_subcommand("eval", "Evaluate detections, retrieval or pair classification");
    c_ev->add_option("--mode", ev.mode, "detection | retrieval | pairs")->capture_default_str();
    c_ev->add_option("--report", ev.report);
    c_ev->add_option("--gold", ev.gold);
    c_ev->add_option("--suspicious", ev.suspicious);
    c_ev->add_option("--index", ev.index);
    c_ev->add_option("--dict", ev.dict);
    c_ev->add_option("--resources", ev.resources);
    c_ev->add_option("--pairs", ev.pairs);
    c_ev->add_option("--ks", ev.ks, "Comma-separated K values for Recall@K")->capture_default_str();
    c_ev->add_option("--threshold", ev.threshold);
    c_ev->add_option("--threshold-file", ev.threshold_file);
    c_ev->add_option("--out", ev.out, "Metrics JSON");
    add_scorer_options(c_ev, ev.scorer);
    c_ev->callback([&] { action = [&] { return cmd_eval(ctx, ev); }; });

    GenArgs gn;
    auto* c_gn = app.add_subcommand("gen", "Generate a synthetic cross-lingual plagiarism dataset");
    c_gn->add_option("--hosts", gn.hosts, "Host documents (L2) JSONL")->required();
    c_gn->add_option("--parallel", gn.parallel, "Parallel corpus TSV (l1, l2)")->required();
    c_gn->add_option("--out-dir", gn.out_dir)->required();
    c_gn->add_option("--seed", gn.cfg.seed)->capture_default_str();
    c_gn->add_option("--min-fraction", gn.cfg.min_fraction)->capture_default_str();
    c_gn->add_option("--max-fraction", gn.cfg.max_fraction)->capture_default_str();
    c_gn->add_option("--min-sources", gn.cfg.min_sources)->capture_default_str();
    c_gn->add_option("--max-sources", gn.cfg.max_sources)->capture_default_str();
    c_gn->add_option("--suspicious-docs", gn.cfg.suspicious_docs)->capture_default_str();
    c_gn->add_option("--reference-docs", gn.cfg.reference_docs)->capture_default_str();
    c_gn->add_option("--filler-paragraphs", gn.cfg.filler_paragraphs)->capture_default_str();
    c_gn->add_option("--sentences-per-filler", gn.cfg.sentences_per_filler)->capture_default_str();
    c_gn->add_option("--l1-lang", gn.cfg.l1_lang)->capture_default_str();
    c_gn->callback([&] { action = [&] { return cmd_gen(ctx, gn); }; });

    PairsArgs pr;
    auto* c_pr = app.add_subcommand("pairs", "Build a translation-pair dataset from a parallel corpus");
    c_pr->add_option("--parallel", pr.parallel)->required();
    c_pr->add_option("--out", pr.out)->required();
    c_pr->add_option("--negatives", pr.negatives, "Negatives per positive")->capture_default_str();
    c_pr->add_option("--seed", pr.seed)->capture_default_str();
    c_pr->add_option("--l1-lang", pr.l1)->capture_default_str();
    c_pr->add_option("--l2-lang", pr.l2)->required();
    c_pr->callback([&] { action = [&] { return cmd_pairs(ctx, pr); }; });

    CalibrateArgs cb;
    auto* c_cb = app.add_subcommand("calibrate", "Choose the F-beta optimal decision threshold");
    c_cb->add_option("--pairs", cb.pairs, "Labelled pair JSONL")->required();
    c_cb->add_option("--dict", cb.dict);
    c_cb->add_option("--resources", cb.resources);
    c_cb->add_option("--out", cb.out, "Threshold JSON")->required();
    c_cb->add_option("--beta", cb.beta)->capture_default_str();
    add_scorer_options(c_cb, cb.scorer);
    c_cb->callback([&] { action = [&] { return cmd_calibrate(ctx, cb); }; });

    std::string manifest;
    auto* c_rp = app.add_subcommand("replay", "Re-run the invocation recorded in a run manifest");
    c_rp->add_option("--manifest", manifest)->required();
    c_rp->callback([&] {
        action = [&] {
            const auto m = json::parse(io::read_file(manifest));
            auto argv = m.at("argv").get<std::vector<std::string>>();
            if (argv.size() < 2 || std::find(argv.begin(), argv.end(), "replay") != argv.end()) {
                throw DataError("manifest does not record a replayable invocation");
            }
            return run(argv, out, err);
        };
    });

    std::vector<const char*> cargv;
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << CLPD_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "clpd: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        return action ? action() : kExitUsage;
    } catch (const CLI::Error& e) {
        err << "clpd: usage: " << e.what() << '\n';
        return kExitUsage;
    } catch (const TransportError& e) {
        err << "clpd: transport error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "clpd: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace clpd::cli
