#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "debatebench/report.hpp"
#include "debatebench/store.hpp"
#include "test_support.hpp"

using namespace debatebench;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct World {
    fs::path dir;
    fs::path config;
    fs::path topics;
    fs::path log;

    World() {
        dir = fs::temp_directory_path() /
              ("debatebench-cli-" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
        log = dir / "cli.log";

        topics = dir / "topics.txt";
        std::ofstream topic_out(topics);
        topic_out << "Is tea better than coffee? | Tea | Coffee\n";
        topic_out << "Plain question?\n";
        topic_out.close();

        config = dir / "gateway.json";
        json doc = {
            {"backends",
             {{"mock", {{"type", "scripted"}, {"mode", "synthetic"}, {"seed", 5}}}}},
            {"clock", {{"mode", "fixed"}, {"at", "2024-06-14T00:00:00Z"}}},
        };
        std::ofstream config_out(config);
        config_out << doc.dump(2);
    }
    ~World() { fs::remove_all(dir); }

    int run(const std::string& args) const {
        std::string cmd =
            std::string(CLI_BIN) + " " + args + " >> " + log.string() + " 2>&1";
        int status = std::system(cmd.c_str());
        return status < 0 ? -1 : WEXITSTATUS(status);
    }

    std::string run_base(const fs::path& store) const {
        return "run --config " + config.string() + " --store " + store.string() +
               " --topics " + topics.string() +
               " --model m1@mock --model m2@mock --judge j@mock --run-id clirun";
    }
};

}  // namespace

TEST_CASE("the smallest nontrivial run persists four debates and one cell") {
    World world;
    fs::path store_path = world.dir / "run.jsonl";
    CHECK(world.run(world.run_base(store_path)) == 0);

    RunStore store = RunStore::open(store_path);
    CHECK(store.debates().size() == 4);  // 1 pair x 2 topics x 2 orders
    CHECK(store.verdicts().size() == 4);
    // side labels from the pipe form reached the prompts
    const StoredDebate& first = store.debates().begin()->second;
    CHECK(first.transcript.turns[0].system_prompt.find("\"Tea\"") != std::string::npos);

    ReportBundle bundle = build_report(store);
    CHECK(bundle.pairs.size() == 1);
    CHECK(bundle.pairs[0].series.topics() == 2);
}

TEST_CASE("configuration errors exit with status 2") {
    World world;
    fs::path store_path = world.dir / "run.jsonl";
    // odd rounds
    CHECK(world.run(world.run_base(store_path) + " --rounds 3") == 2);
    // unknown backend alias
    CHECK(world.run("run --config " + world.config.string() + " --store " +
                    store_path.string() + " --model m1@nope --judge j@mock") == 2);
    // missing config file
    CHECK(world.run("run --config /nonexistent.json --store " + store_path.string() +
                    " --model m1@mock --judge j@mock") == 2);
    // no models
    CHECK(world.run("run --config " + world.config.string() + " --store " +
                    store_path.string() + " --judge j@mock") == 2);

    // existing store without --resume, then manifest mismatch with it
    CHECK(world.run(world.run_base(store_path)) == 0);
    CHECK(world.run(world.run_base(store_path)) == 2);
    CHECK(world.run(world.run_base(store_path) + " --resume --rounds 6") == 2);
}

TEST_CASE("verdict set records a manual verdict that completes the run") {
    World world;
    fs::path store_path = world.dir / "run.jsonl";
    REQUIRE(world.run(world.run_base(store_path)) == 0);

    std::string id;
    {
        RunStore store = RunStore::open(store_path);
        id = store.debates().begin()->first;
    }
    // a second judge has no verdicts yet; set one manually
    CHECK(world.run("verdict set \"" + id + "\" --store " + store_path.string() +
                    " --s1 9 --s2 3.5 --winner 1 --judge human") == 0);
    // duplicates are refused loudly
    CHECK(world.run("verdict set \"" + id + "\" --store " + store_path.string() +
                    " --s1 9 --s2 3.5 --winner 1 --judge human") == 1);
    // unknown debate id
    CHECK(world.run("verdict set nope --store " + store_path.string() +
                    " --s1 9 --s2 3 --winner 1") == 2);

    RunStore store = RunStore::open(store_path);
    const StoredVerdict* v = store.find_verdict(id, "human");
    REQUIRE(v != nullptr);
    CHECK(v->verdict.parse_mode == ParseMode::Manual);
    CHECK(v->verdict.score2.tenths() == 35);
    CHECK(v->verdict.winner == Winner::Side1);
}

TEST_CASE("rejudge through the CLI honors the pair filter") {
    World world;
    fs::path store_path = world.dir / "run.jsonl";
    REQUIRE(world.run(world.run_base(store_path) + " --model m3@mock") == 0);

    CHECK(world.run("rejudge --config " + world.config.string() + " --store " +
                    store_path.string() + " --judge j2@mock --pair m1:m3") == 0);
    RunStore store = RunStore::open(store_path);
    int rejudged = 0;
    for (const auto& [id, debate] : store.debates()) {
        if (store.has_verdict(id, "j2")) {
            ++rejudged;
            bool is_m1_m3 = (debate.pairing.model_a.name == "m1" &&
                             debate.pairing.model_b.name == "m3") ||
                            (debate.pairing.model_a.name == "m3" &&
                             debate.pairing.model_b.name == "m1");
            CHECK(is_m1_m3);
        }
        CHECK(store.has_verdict(id, "j"));
    }
    CHECK(rejudged == 4);  // one series, 2 topics x 2 orders
}

TEST_CASE("rank and report read the store and exit by completeness") {
    World world;
    fs::path store_path = world.dir / "run.jsonl";
    REQUIRE(world.run(world.run_base(store_path)) == 0);
    CHECK(world.run("rank --store " + store_path.string()) == 0);
    fs::path out = world.dir / "reports";
    CHECK(world.run("report --store " + store_path.string() + " --out " +
                    out.string()) == 0);
    CHECK(fs::exists(out / "matrix.csv"));
    CHECK(fs::exists(out / "pairs" / "m1_vs_m2.md"));
    // a judge with no verdicts yields a provisional (exit 1) ranking
    CHECK(world.run("rank --store " + store_path.string() + " --judge ghost") == 1);
}
