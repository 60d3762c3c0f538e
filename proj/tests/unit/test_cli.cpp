#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "clpd/io.hpp"
#include "test_util.hpp"
#include "world.hpp"

using clpd::testing::fixture;
using clpd::testing::TempDir;
using nlohmann::json;
namespace io = clpd::io;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "clpd");
    std::ostringstream out, err;
    const int code = clpd::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string p(const std::filesystem::path& x) { return x.string(); }

std::uint16_t closed_port() {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ::close(fd);
    return ntohs(addr.sin_port);
}

// build-clusters + index over the tiny fixture; returns (dict, index) paths.
std::pair<std::string, std::string> build_tiny(const TempDir& dir) {
    const auto dict = p(dir / "dict.tsv");
    const auto index = p(dir / "ref.idx");
    auto r = run({"build-clusters", "--senses", p(fixture("tiny/senses.tsv")), "--translations",
                  p(fixture("tiny/translations.tsv")), "--out", dict});
    EXPECT_EQ(r.code, 0) << r.err;
    r = run({"index", "--dict", dict, "--reference", p(fixture("tiny/reference.jsonl")), "--resources",
             p(fixture("tiny/resources")), "--out", index});
    EXPECT_EQ(r.code, 0) << r.err;
    return {dict, index};
}

}  // namespace

TEST(Cli, BuildClustersMatchesGolden) {
    TempDir dir;
    auto r = run({"build-clusters", "--senses", p(fixture("tiny/senses.tsv")), "--mode", "top1", "--out",
                  p(dir / "d.tsv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(io::read_file(dir / "d.tsv"), io::read_file(fixture("tiny/dictionary.top1.tsv")));
    r = run({"build-clusters", "--senses", p(fixture("tiny/senses.tsv")), "--translations",
             p(fixture("tiny/translations.tsv")), "--out", p(dir / "a.tsv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(io::read_file(dir / "a.tsv"), io::read_file(fixture("tiny/dictionary.top1.aug.tsv")));
    const auto summary = json::parse(r.out);
    EXPECT_EQ(summary.at("translations_skipped"), 1);
    const auto manifest = json::parse(io::read_file(dir / "a.tsv.manifest.json"));
    EXPECT_EQ(manifest.at("subcommand"), "build-clusters");
    EXPECT_EQ(manifest.at("config").at("mode"), "top1");
    EXPECT_TRUE(manifest.contains("version"));
}

TEST(Cli, MissingSensesIsUsageError) {
    TempDir dir;
    const auto r = run({"build-clusters", "--out", p(dir / "d.tsv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--senses"), std::string::npos);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"build-clusters", "--senses", "x", "--mode", "some", "--out", "y"}).code, 2);
}

TEST(Cli, AllEqualsTop1OnSingleSenseInput) {
    TempDir dir;
    io::write_file(dir / "s.tsv", "02084071-n\ten\tdog\tNOUN\t0\n02084071-n\tru\tсобака\tNOUN\n");
    ASSERT_EQ(run({"build-clusters", "--senses", p(dir / "s.tsv"), "--mode", "all", "--out", p(dir / "all.tsv")}).code, 0);
    ASSERT_EQ(run({"build-clusters", "--senses", p(dir / "s.tsv"), "--mode", "top1", "--out", p(dir / "t.tsv")}).code, 0);
    EXPECT_EQ(io::read_file(dir / "all.tsv"), io::read_file(dir / "t.tsv"));
}

TEST(Cli, ParseErrorInSensesIsRuntimeFailure) {
    TempDir dir;
    io::write_file(dir / "s.tsv", "c1\ten\tdog\n");
    const auto r = run({"build-clusters", "--senses", p(dir / "s.tsv"), "--out", p(dir / "d.tsv")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST(Cli, FullPipelineOnTinyFixture) {
    TempDir dir;
    const auto [dict, index] = build_tiny(dir);
    auto r = run({"detect", "--index", index, "--dict", dict, "--suspicious", p(fixture("tiny/suspicious.jsonl")),
                  "--resources", p(fixture("tiny/resources")), "--threshold", "0.5", "--out", p(dir / "report.json"),
                  "--trace", p(dir / "trace.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"eval", "--mode", "detection", "--report", p(dir / "report.json"), "--gold", p(fixture("tiny/gold.json")),
             "--suspicious", p(fixture("tiny/suspicious.jsonl")), "--out", p(dir / "metrics.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto m = json::parse(io::read_file(dir / "metrics.json"));
    EXPECT_EQ(m.at("f1").get<double>(), 1.0);
    EXPECT_EQ(m.at("precision").get<double>(), 1.0);
    EXPECT_EQ(m.at("recall").get<double>(), 1.0);
    const auto report = json::parse(io::read_file(dir / "report.json"));
    EXPECT_EQ(report.at("config").at("k"), 50);
    EXPECT_EQ(report.at("config").at("k1"), 1.2);
    EXPECT_EQ(report.at("config").at("b"), 0.75);
    std::istringstream trace(io::read_file(dir / "trace.jsonl"));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(trace, line)) {
        EXPECT_TRUE(json::accept(line)) << line;
        ++lines;
    }
    EXPECT_EQ(lines, 6u);
}

TEST(Cli, RetrievalEval) {
    TempDir dir;
    const auto [dict, index] = build_tiny(dir);
    const auto r = run({"eval", "--mode", "retrieval", "--index", index, "--dict", dict, "--suspicious",
                        p(fixture("tiny/suspicious.jsonl")), "--resources", p(fixture("tiny/resources")), "--gold",
                        p(fixture("tiny/gold.json"))});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    for (const auto* k : {"1", "5", "10", "50"}) EXPECT_EQ(j.at("recall_at").at(k).get<double>(), 1.0);
}

TEST(Cli, EmptyReportHasZeroRecall) {
    TempDir dir;
    io::write_file(dir / "empty.json", R"({"config": {}, "detections": []})");
    const auto r = run({"eval", "--report", p(dir / "empty.json"), "--gold", p(fixture("tiny/gold.json"))});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("recall").get<double>(), 0.0);
}

TEST(Cli, DetectRequiresThreshold) {
    TempDir dir;
    const auto [dict, index] = build_tiny(dir);
    const auto r = run({"detect", "--index", index, "--dict", dict, "--suspicious", p(fixture("tiny/suspicious.jsonl")),
                        "--out", p(dir / "r.json")});
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, ThresholdFileFromCalibrate) {
    TempDir dir;
    const auto [dict, index] = build_tiny(dir);
    io::write_file(dir / "parallel.tsv",
                   "The old dog runs in the green garden.\tСтарая собака бежит в зелёном саду.\n"
                   "The teacher reads a big book.\tУчитель читает большую книгу.\n"
                   "The child sees a red house.\tРебёнок видит красный дом.\n"
                   "Birds sing near the river.\tПтицы поют у реки.\n");
    auto r = run({"pairs", "--parallel", p(dir / "parallel.tsv"), "--l2-lang", "ru", "--negatives", "2", "--out",
                  p(dir / "pairs.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"calibrate", "--pairs", p(dir / "pairs.jsonl"), "--dict", dict, "--resources", p(fixture("tiny/resources")),
             "--out", p(dir / "threshold.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = json::parse(io::read_file(dir / "threshold.json"));
    EXPECT_EQ(t.at("beta"), 0.25);
    EXPECT_EQ(t.at("f_beta").get<double>(), 1.0);
    r = run({"detect", "--index", index, "--dict", dict, "--suspicious", p(fixture("tiny/suspicious.jsonl")),
             "--resources", p(fixture("tiny/resources")), "--threshold-file", p(dir / "threshold.json"), "--out",
             p(dir / "r.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"eval", "--mode", "pairs", "--pairs", p(dir / "pairs.jsonl"), "--dict", dict, "--resources",
             p(fixture("tiny/resources")), "--threshold-file", p(dir / "threshold.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("f1").get<double>(), 1.0);
}

TEST(Cli, RemoteScorerWithoutServerFails) {
    TempDir dir;
    const auto [dict, index] = build_tiny(dir);
    const auto r = run({"detect", "--index", index, "--dict", dict, "--suspicious", p(fixture("tiny/suspicious.jsonl")),
                        "--resources", p(fixture("tiny/resources")), "--threshold", "0.5", "--scorer",
                        "remote:127.0.0.1:" + std::to_string(closed_port()), "--timeout-ms", "500", "--out",
                        p(dir / "r.json")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("transport"), std::string::npos) << r.err;
    EXPECT_FALSE(std::filesystem::exists(dir / "r.json"));
}

TEST(Cli, MismatchedDictionaryRefused) {
    TempDir dir;
    const auto [dict, index] = build_tiny(dir);
    ASSERT_EQ(run({"build-clusters", "--senses", p(fixture("tiny/senses.tsv")), "--out", p(dir / "other.tsv")}).code, 0);
    const auto r = run({"detect", "--index", index, "--dict", p(dir / "other.tsv"), "--suspicious",
                        p(fixture("tiny/suspicious.jsonl")), "--threshold", "0.5", "--out", p(dir / "r.json")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("fingerprint"), std::string::npos) << r.err;
}

TEST(Cli, JobsAndProgress) {
    TempDir dir;
    const auto [dict, index] = build_tiny(dir);
    auto detect = [&](const std::string& jobs, const std::string& out, bool progress) {
        std::vector<std::string> args;
        if (progress) args.push_back("--progress");
        for (const auto& a : {"detect", "--index"}) args.push_back(a);
        args.insert(args.end(), {index, "--dict", dict, "--suspicious", p(fixture("tiny/suspicious.jsonl")), "--resources",
                                 p(fixture("tiny/resources")), "--threshold", "0.5", "--jobs", jobs, "--out", out});
        return run(args);
    };
    const auto a = detect("1", p(dir / "a.json"), false);
    const auto b = detect("4", p(dir / "b.json"), true);
    ASSERT_EQ(a.code, 0);
    ASSERT_EQ(b.code, 0);
    EXPECT_EQ(io::read_file(dir / "a.json"), io::read_file(dir / "b.json"));
    std::istringstream err(b.err);
    std::string line;
    std::size_t events = 0;
    while (std::getline(err, line)) {
        const auto j = json::parse(line);
        EXPECT_EQ(j.at("event"), "progress");
        ++events;
    }
    EXPECT_EQ(events, 2u);
}

TEST(Cli, ReplayReproducesOutputs) {
    TempDir dir;
    const auto [dict, index] = build_tiny(dir);
    const auto report = p(dir / "report.json");
    ASSERT_EQ(run({"detect", "--index", index, "--dict", dict, "--suspicious", p(fixture("tiny/suspicious.jsonl")),
                   "--resources", p(fixture("tiny/resources")), "--threshold", "0.5", "--out", report})
                  .code,
              0);
    const auto first_index = io::read_file(index);
    const auto first_report = io::read_file(report);
    std::filesystem::remove(index);
    std::filesystem::remove(report);
    ASSERT_EQ(run({"replay", "--manifest", index + ".manifest.json"}).code, 0);
    ASSERT_EQ(run({"replay", "--manifest", report + ".manifest.json"}).code, 0);
    EXPECT_EQ(io::read_file(index), first_index);
    EXPECT_EQ(io::read_file(report), first_report);
}

TEST(Cli, GenWritesDataset) {
    TempDir dir;
    const auto w = clpd::testing::make_world();
    io::write_file(dir / "hosts.jsonl", io::corpus_to_jsonl(w.hosts));
    io::write_file(dir / "parallel.tsv", w.parallel_tsv());
    auto gen = [&](const std::string& out) {
        return run({"gen", "--hosts", p(dir / "hosts.jsonl"), "--parallel", p(dir / "parallel.tsv"), "--seed", "5",
                    "--suspicious-docs", "6", "--reference-docs", "5", "--out-dir", p(dir / out)});
    };
    ASSERT_EQ(gen("a").code, 0);
    ASSERT_EQ(gen("b").code, 0);
    for (const auto* f : {"suspicious.jsonl", "reference.jsonl", "gold.json"}) {
        EXPECT_EQ(io::read_file(dir / "a" / f), io::read_file(dir / "b" / f)) << f;
    }
    EXPECT_EQ(io::read_corpus(dir / "a" / "suspicious.jsonl").size(), 6u);
}

TEST(Cli, CoverageReport) {
    TempDir dir;
    const auto [dict, index] = build_tiny(dir);
    const auto r = run({"coverage", "--dict", dict, "--corpus", p(fixture("tiny/suspicious.jsonl")), "--resources",
                        p(fixture("tiny/resources"))});
    ASSERT_EQ(r.code, 0) << r.err;
    const double c = json::parse(r.out).at("coverage").get<double>();
    EXPECT_GT(c, 0.8);
    EXPECT_LT(c, 1.0);
}

TEST(Cli, VersionAndHelp) {
    EXPECT_EQ(run({"--version"}).code, 0);
    const auto h = run({"--help"});
    EXPECT_EQ(h.code, 0);
    EXPECT_NE(h.out.find("build-clusters"), std::string::npos);
}
