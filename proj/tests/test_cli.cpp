#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support/subprocess.hpp"

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

const std::string kCli = RAGTUNER_CLI_PATH;
const std::string kFixtures = RAGTUNER_FIXTURE_DIR;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("validate: clean fixture exits 0 with no output") {
    auto result = subprocess::run(kCli + " validate -c " + kFixtures + "/specs/vanilla.json");
    CHECK(result.exit_code == 0);
    CHECK(result.output.empty());
}

TEST_CASE("validate: unknown component kind exits 1 with one diagnostic") {
    auto dir = temp_dir("ragtuner_cli_validate");
    auto bad = dir / "bad.json";
    std::ofstream(bad) << R"({
      "name": "typo",
      "domains": [{"name": "chunks", "indexed": true, "dim": 8}],
      "stages": [
        {"kind": "chunker", "name": "c", "params": {}, "inputs": [], "outputs": ["chunks"]},
        {"kind": "retreiver", "name": "r", "params": {}, "inputs": ["chunks"], "outputs": []}
      ]
    })";
    auto result = subprocess::run(kCli + " validate -c " + bad.string());
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("UnknownComponent") != std::string::npos);
    CHECK(result.output.find("vector_retriever") != std::string::npos);
}

TEST_CASE("validate: missing file exits 2") {
    auto result = subprocess::run(kCli + " validate -c /nonexistent/spec.json 2>/dev/null");
    CHECK(result.exit_code == 2);
}

TEST_CASE("usage errors exit 2") {
    CHECK(subprocess::run(kCli + " 2>/dev/null").exit_code == 2);
    CHECK(subprocess::run(kCli + " tune 2>/dev/null").exit_code == 2);
    CHECK(subprocess::run(kCli + " frobnicate 2>/dev/null").exit_code == 2);
}

TEST_CASE("run: vanilla fixture writes report and run files") {
    auto dir = temp_dir("ragtuner_cli_run");
    auto result = subprocess::run(kCli + " run -c " + kFixtures + "/specs/vanilla.json --corpus " +
                                  kFixtures + "/corpus --data " + kFixtures +
                                  "/data/dev.jsonl -o " + dir.string() + " 2>/dev/null");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("R@5") != std::string::npos);

    auto report = json::parse(slurp((dir / "report.json").string()));
    double recall = report["mean_recall_at_k"].get<double>();
    double f1 = report["mean_f1"].get<double>();
    CHECK(recall >= 0.0);
    CHECK(recall <= 1.0);
    CHECK(f1 >= 0.0);
    CHECK(f1 <= 1.0);

    // one run record per query, schema fields present
    std::istringstream lines(slurp((dir / "run.jsonl").string()));
    std::string line;
    int records = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        auto rec = json::parse(line);
        CHECK(rec.contains("qid"));
        CHECK(rec.contains("retrieved"));
        CHECK(rec.contains("answer"));
        CHECK(rec.contains("timings_ms"));
        ++records;
    }
    CHECK(records == 2);
}

TEST_CASE("run: graph fixture logs a nonzero synonym-edge count") {
    auto dir = temp_dir("ragtuner_cli_run_graph");
    auto result = subprocess::run(kCli + " run -c " + kFixtures + "/specs/graph.json --corpus " +
                                  kFixtures + "/corpus --data " + kFixtures +
                                  "/data/dev.jsonl -o " + dir.string() + " 2>" +
                                  (dir / "stderr.txt").string());
    CHECK(result.exit_code == 0);
    auto log = slurp((dir / "stderr.txt").string());
    auto pos = log.find("synonym_edges = ");
    REQUIRE(pos != std::string::npos);
    int count = std::stoi(log.substr(pos + 16));
    CHECK(count > 0);
}

TEST_CASE("run: unreadable corpus path exits 2") {
    auto dir = temp_dir("ragtuner_cli_run_bad");
    auto result = subprocess::run(kCli + " run -c " + kFixtures +
                                  "/specs/vanilla.json --corpus /nonexistent --data " + kFixtures +
                                  "/data/dev.jsonl -o " + dir.string() + " 2>/dev/null");
    CHECK(result.exit_code == 2);
}

TEST_CASE("tune/replay/report lifecycle on the vanilla fixture") {
    auto dir = temp_dir("ragtuner_cli_tune");
    auto trace = (dir / "trace.jsonl").string();
    auto base = kCli + " tune -c " + kFixtures + "/specs/vanilla.json --data " + kFixtures +
                "/data/dev.jsonl --budget 5 --seed 7 --trace ";

    auto result = subprocess::run(base + trace + " 2>/dev/null");
    CHECK(result.exit_code == 0);
    auto best = json::parse(result.output);
    CHECK(best["trials"].get<int>() == 5);

    // five trace lines, each a valid record
    {
        std::istringstream lines(slurp(trace));
        std::string line;
        int n = 0;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            auto rec = json::parse(line);
            CHECK(rec["trial"].get<int>() == n);
            CHECK(rec.contains("assignment"));
            ++n;
        }
        CHECK(n == 5);
    }

    // best-spec file parses as a concrete spec
    auto best_spec = json::parse(slurp(trace + ".best.json"));
    CHECK(best_spec["stages"][0]["params"]["chunk_size"].is_number_integer());

    SUBCASE("rerun with the same seed is byte-identical") {
        auto trace2 = (dir / "trace2.jsonl").string();
        auto r2 = subprocess::run(base + trace2 + " 2>/dev/null");
        CHECK(r2.exit_code == 0);
        CHECK(slurp(trace) == slurp(trace2));
    }

    SUBCASE("warm start appends up to the requested budget") {
        auto trace3 = (dir / "trace3.jsonl").string();
        auto r3 = subprocess::run(kCli + " tune -c " + kFixtures + "/specs/vanilla.json --data " +
                                  kFixtures + "/data/dev.jsonl --budget 8 --seed 8 --trace " +
                                  trace3 + " --warm-start " + trace + " 2>/dev/null");
        CHECK(r3.exit_code == 0);
        std::istringstream lines(slurp(trace3));
        std::string line;
        int total = 0, warm = 0;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            auto rec = json::parse(line);
            if (rec["phase"] == "warm") ++warm;
            ++total;
        }
        CHECK(total == 8);
        CHECK(warm == 5);
    }

    SUBCASE("replay reproduces the recorded objective under stubs") {
        auto r = subprocess::run(kCli + " replay --trace " + trace + " -c " + kFixtures +
                                 "/specs/vanilla.json --data " + kFixtures +
                                 "/data/dev.jsonl 2>/dev/null");
        CHECK(r.exit_code == 0);
        auto replayed = json::parse(r.output);
        CHECK(std::abs(replayed["objective_delta"].get<double>()) <= 1e-9);
    }

    SUBCASE("replay --trial uses exactly that trial's assignment") {
        auto r = subprocess::run(kCli + " replay --trace " + trace + " -c " + kFixtures +
                                 "/specs/vanilla.json --data " + kFixtures +
                                 "/data/dev.jsonl --trial 3 2>/dev/null");
        CHECK(r.exit_code == 0);
        CHECK(json::parse(r.output)["trial"].get<int>() == 3);
    }

    SUBCASE("replay against a spec with different tunables is incompatible") {
        auto r = subprocess::run(kCli + " replay --trace " + trace + " -c " + kFixtures +
                                 "/specs/graph.json --data " + kFixtures +
                                 "/data/dev.jsonl 2>/dev/null");
        CHECK(r.exit_code == 1);
    }

    SUBCASE("report prints a TSV curve") {
        auto r = subprocess::run(kCli + " report --trace " + trace);
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("trial\tphase\tobjective\tbest") != std::string::npos);
        int lines = 0;
        for (char c : r.output) lines += c == '\n' ? 1 : 0;
        CHECK(lines == 6);  // header + 5 trials
    }
}
