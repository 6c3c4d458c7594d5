#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include <nlohmann/json.hpp>

#include "debatebench/errors.hpp"
#include "debatebench/report.hpp"
#include "debatebench/runner.hpp"
#include "test_support.hpp"

using namespace debatebench;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("debatebench-report-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Gateway synthetic_gateway() {
    json doc = {{"backends",
                 {{"mock", {{"type", "scripted"}, {"mode", "synthetic"}, {"seed", 3}}}}}};
    return Gateway(GatewayConfig::from_json(doc));
}

std::vector<Topic> topics_of(int n) {
    std::vector<Topic> out;
    for (int i = 1; i <= n; ++i) {
        Topic t;
        t.index = i;
        t.question = "Q" + std::to_string(i) + "?";
        out.push_back(t);
    }
    return out;
}

// Runs a tiny tournament into a fresh store and returns its path.
fs::path run_small_tournament(const fs::path& dir, int workers) {
    std::vector<ModelId> roster = {ModelId{"alpha", "mock"}, ModelId{"beta", "mock"},
                                   ModelId{"gamma", "mock"}};
    std::vector<Topic> topics = topics_of(3);
    RunManifest m;
    m.run_id = "small";
    m.roster = roster;
    m.judge_model = ModelId{"arbiter", "mock"};
    m.rounds = 4;
    m.self_play = false;
    m.topic_count = 3;
    m.topics_digest = topics_digest(topics);
    m.templates_digest = TemplateSet::defaults().digest();
    m.gateway_digest = "fixed";

    fs::path file = dir / ("run-w" + std::to_string(workers) + ".jsonl");
    RunStore store = RunStore::create(file, m);
    Gateway gateway = synthetic_gateway();
    FixedClock clock(parse_iso8601_utc("2024-06-14T00:00:00Z"));
    std::vector<Pairing> plan = resume_plan(store, schedule(roster, topics, false));
    RunnerOptions options;
    options.workers = workers;
    RunSummary summary = run_tournament(store, plan, TemplateSet::defaults(), gateway,
                                        m.judge_model, clock, options);
    REQUIRE(summary.completed == 18);  // 3 pairs x 3 topics x 2 orders
    return file;
}

}  // namespace

TEST_CASE("reports are a pure function of the store") {
    TempDir tmp;
    fs::path store_a = run_small_tournament(tmp.path, 1);
    fs::path store_b = run_small_tournament(tmp.path, 8);

    // identical store bytes across worker counts
    CHECK(test_support::read_file(store_a.string()) ==
          test_support::read_file(store_b.string()));

    RunStore sa = RunStore::open(store_a);
    RunStore sb = RunStore::open(store_b);
    ReportBundle ba = build_report(sa);
    ReportBundle bb = build_report(sb);
    CHECK(render_matrix_markdown(ba) == render_matrix_markdown(bb));
    CHECK(render_matrix_csv(ba) == render_matrix_csv(bb));
    CHECK(render_ranking_markdown(ba) == render_ranking_markdown(bb));
    CHECK(render_ranking_csv(ba) == render_ranking_csv(bb));
    CHECK_FALSE(ba.provisional);
}

TEST_CASE("markdown and CSV matrices carry identical cells") {
    TempDir tmp;
    RunStore store = RunStore::open(run_small_tournament(tmp.path, 2));
    ReportBundle bundle = build_report(store);

    std::string md = render_matrix_markdown(bundle);
    std::string csv = render_matrix_csv(bundle);
    // every series cell appears in both renderings
    for (const PairReport& pair : bundle.pairs) {
        std::string cell = std::to_string(pair.series.wins_a) + "-" +
                           std::to_string(pair.series.wins_b);
        CAPTURE(cell);
        CHECK(md.find(" " + cell + " ") != std::string::npos);
        CHECK(csv.find("," + cell) != std::string::npos);
    }
    std::string rmd = render_ranking_markdown(bundle);
    std::string rcsv = render_ranking_csv(bundle);
    for (const RankingEntry& e : bundle.ranking.entries) {
        CHECK(rmd.find("| " + e.model.name + " | " + std::to_string(e.series_wins)) !=
              std::string::npos);
        CHECK(rcsv.find("," + e.model.name + "," + std::to_string(e.series_wins)) !=
              std::string::npos);
    }
}

TEST_CASE("single pair matrix cell") {
    TempDir tmp;
    // hand-build a one-pair store with a 3-1-21 series worth of verdicts
    std::vector<ModelId> roster = {ModelId{"a", "mock"}, ModelId{"b", "mock"}};
    RunManifest m;
    m.run_id = "cell";
    m.roster = roster;
    m.judge_model = ModelId{"j", "mock"};
    m.rounds = 2;
    m.self_play = false;
    m.topic_count = 25;
    m.topics_digest = "t";
    m.templates_digest = "s";
    m.gateway_digest = "g";
    RunStore store = RunStore::create(tmp.path / "cell.jsonl", m);

    auto add_debate = [&](int topic, DebateOrder order, Winner w) {
        Pairing p;
        p.pair_index = 0;
        p.model_a = roster[0];
        p.model_b = roster[1];
        p.topic.index = topic;
        p.topic.question = "Q?";
        p.order = order;
        Transcript t;
        t.spec.topic = p.topic;
        t.spec.first_mover = p.first_mover();
        t.spec.second_mover = p.second_mover();
        t.spec.rounds = 2;
        t.started_at = t.finished_at = "2024-06-14T00:00:00Z";
        for (int k = 1; k <= 2; ++k) {
            Turn turn;
            turn.index = k;
            turn.speaker = k == 1 ? SideRole::First : SideRole::Second;
            turn.model = k == 1 ? t.spec.first_mover : t.spec.second_mover;
            turn.system_prompt = "s";
            turn.user_prompt = "u";
            turn.response = "r";
            t.turns.push_back(turn);
        }
        std::string id = make_debate_id(m.run_id, p);
        store.append(StoredDebate{id, p, t, "2024-06-14T00:00:00Z"});
        JudgeVerdict v{*Score::parse("8"), *Score::parse("7"), w, ParseMode::Strict,
                       m.judge_model, "raw"};
        store.append(StoredVerdict{id, v, "2024-06-14T00:00:00Z"});
    };

    // topics 1..3: A wins both debates; topic 4: B wins both; rest split
    for (int topic = 1; topic <= 25; ++topic) {
        Winner home, away;
        if (topic <= 3) {
            home = Winner::Side1;  // A as side 1 wins
            away = Winner::Side2;  // A as side 2 wins
        } else if (topic == 4) {
            home = Winner::Side2;
            away = Winner::Side1;
        } else {
            home = Winner::Side1;
            away = Winner::Side1;  // split
        }
        add_debate(topic, DebateOrder::AFirst, home);
        add_debate(topic, DebateOrder::BFirst, away);
    }

    ReportBundle bundle = build_report(store);
    REQUIRE(bundle.pairs.size() == 1);
    CHECK(bundle.pairs[0].series.wins_a == 3);
    CHECK(bundle.pairs[0].series.wins_b == 1);
    CHECK(bundle.pairs[0].series.ties == 21);
    std::string md = render_matrix_markdown(bundle);
    CHECK(md.find(" 3-1 ") != std::string::npos);

    std::string pair_md = render_pair_markdown(bundle.pairs[0]);
    CHECK(pair_md.find("| 1 | a | 8 | 7 | a | 8 | 7 | a |") != std::string::npos);
    CHECK(pair_md.find("| 4 | b | 8 | 7 | b | 8 | 7 | b |") != std::string::npos);
    CHECK(pair_md.find("ties 21") != std::string::npos);
}

TEST_CASE("report files are written and stable") {
    TempDir tmp;
    RunStore store = RunStore::open(run_small_tournament(tmp.path, 4));
    ReportBundle bundle = build_report(store);
    fs::path out = tmp.path / "reports";
    write_reports(bundle, out);
    CHECK(fs::exists(out / "matrix.md"));
    CHECK(fs::exists(out / "matrix.csv"));
    CHECK(fs::exists(out / "ranking.md"));
    CHECK(fs::exists(out / "ranking.csv"));
    CHECK(fs::exists(out / "pairs" / "alpha_vs_beta.md"));
    CHECK(fs::exists(out / "pairs" / "alpha_vs_gamma.md"));
    CHECK(fs::exists(out / "pairs" / "beta_vs_gamma.md"));

    std::string before = test_support::read_file((out / "matrix.md").string());
    write_reports(bundle, out);
    CHECK(test_support::read_file((out / "matrix.md").string()) == before);
}

TEST_CASE("provisional stores are labeled and missing rows marked") {
    TempDir tmp;
    fs::path file = run_small_tournament(tmp.path, 2);
    // drop the final verdict line to make the store partial
    std::string content = test_support::read_file(file.string());
    size_t last_line_start = content.rfind('\n', content.size() - 2);
    std::string truncated = content.substr(0, last_line_start + 1);
    fs::path partial = tmp.path / "partial.jsonl";
    {
        std::ofstream out(partial, std::ios::binary);
        out << truncated;
    }
    RunStore store = RunStore::open(partial);
    ReportBundle bundle = build_report(store);
    CHECK(bundle.provisional);
    CHECK(render_matrix_markdown(bundle).find("Provisional") != std::string::npos);
    std::string ranking = render_ranking_markdown(bundle);
    CHECK(ranking.find("Provisional") != std::string::npos);
}

TEST_CASE("manual verdicts merge at aggregation time") {
    TempDir tmp;
    fs::path file = run_small_tournament(tmp.path, 2);
    RunStore store = RunStore::open(file);

    // pick one debate and override its verdict manually
    const auto& [id, debate] = *store.debates().begin();
    ReportOptions options;
    options.manual.emplace(
        id, VerdictTriple{*Score::parse("9.5"), *Score::parse("1"), Winner::Side1});
    ReportBundle bundle = build_report(store, options);
    bool found = false;
    for (const std::string& a : bundle.anomalies) {
        if (a.find("manual verdict") != std::string::npos) found = true;
    }
    CHECK(found);

    // and the manual file loader round-trips
    fs::path manual = tmp.path / "manual.json";
    {
        std::ofstream out(manual);
        out << R"({")" << id
            << R"(": {"score1": "9.5", "score2": "1", "winner": "1"}})";
    }
    auto loaded = load_manual_verdicts(manual);
    REQUIRE(loaded.count(id) == 1);
    CHECK(loaded.at(id).score1.tenths() == 95);
    CHECK(loaded.at(id).winner == Winner::Side1);
}

TEST_CASE("judge agreement over shared debates") {
    TempDir tmp;
    fs::path file = run_small_tournament(tmp.path, 2);
    RunStore store = RunStore::open(file);

    // second judge agrees on every debate except one
    bool first = true;
    for (const auto& [id, debate] : store.debates()) {
        const StoredVerdict* v = store.find_verdict(id, "arbiter");
        REQUIRE(v != nullptr);
        JudgeVerdict other = v->verdict;
        other.judge_model = ModelId{"second", "mock"};
        if (first) {
            other.winner = other.winner == Winner::Side1 ? Winner::Side2 : Winner::Side1;
            first = false;
        }
        store.append(StoredVerdict{id, other, "2024-06-14T00:00:00Z"});
    }
    Agreement agreement = judge_agreement(store, "arbiter", "second");
    CHECK(agreement.compared == 18);
    CHECK(agreement.agreed == 17);
}

TEST_CASE("self-play series appear on the diagonal and imbalance is annotated") {
    TempDir tmp;
    std::vector<ModelId> roster = {ModelId{"solo", "mock"}};
    RunManifest m;
    m.run_id = "self";
    m.roster = roster;
    m.judge_model = ModelId{"j", "mock"};
    m.rounds = 2;
    m.self_play = true;
    m.topic_count = 5;
    m.topics_digest = "t";
    m.templates_digest = "s";
    m.gateway_digest = "g";
    RunStore store = RunStore::create(tmp.path / "self.jsonl", m);

    for (int topic = 1; topic <= 5; ++topic) {
        for (DebateOrder order : {DebateOrder::AFirst, DebateOrder::BFirst}) {
            Pairing p;
            p.pair_index = 0;
            p.model_a = roster[0];
            p.model_b = roster[0];
            p.topic.index = topic;
            p.topic.question = "Q?";
            p.order = order;
            Transcript t;
            t.spec.topic = p.topic;
            t.spec.first_mover = roster[0];
            t.spec.second_mover = roster[0];
            t.spec.rounds = 2;
            t.started_at = t.finished_at = "2024-06-14T00:00:00Z";
            for (int k = 1; k <= 2; ++k) {
                Turn turn;
                turn.index = k;
                turn.speaker = k == 1 ? SideRole::First : SideRole::Second;
                turn.model = roster[0];
                turn.system_prompt = "s";
                turn.user_prompt = "u";
                turn.response = "r";
                t.turns.push_back(turn);
            }
            std::string id = make_debate_id(m.run_id, p);
            store.append(StoredDebate{id, p, t, "2024-06-14T00:00:00Z"});
            // seat A always wins: maximally imbalanced self-play
            Winner w = order == DebateOrder::AFirst ? Winner::Side1 : Winner::Side2;
            JudgeVerdict v{*Score::parse("8"), *Score::parse("7"), w, ParseMode::Strict,
                           m.judge_model, "raw"};
            store.append(StoredVerdict{id, v, "2024-06-14T00:00:00Z"});
        }
    }

    ReportBundle bundle = build_report(store);
    REQUIRE(bundle.pairs.size() == 1);
    CHECK(bundle.pairs[0].series.wins_a == 5);
    CHECK(bundle.pairs[0].series.wins_b == 0);
    bool flagged = false;
    for (const std::string& a : bundle.anomalies) {
        if (a.find("self-play") != std::string::npos) flagged = true;
    }
    CHECK(flagged);
    // diagonal cell rendered
    CHECK(render_matrix_markdown(bundle).find(" 5-0 ") != std::string::npos);
    // ranking excludes self-play: solo has zero series wins
    CHECK(bundle.ranking.entries[0].series_wins == 0);
}

namespace {

// Builds a bundle directly from series results, bypassing the store.
ReportBundle bundle_from_series(const std::vector<ModelId>& roster,
                                const std::map<std::pair<std::string, std::string>,
                                               std::pair<int, int>>& cells,
                                int topics) {
    ReportBundle bundle;
    bundle.judge_name = "fixture";
    bundle.roster = roster;
    bundle.topic_count = topics;
    for (size_t i = 0; i < roster.size(); ++i) {
        for (size_t j = i; j < roster.size(); ++j) {
            auto it = cells.find({roster[i].name, roster[j].name});
            auto rit = cells.find({roster[j].name, roster[i].name});
            PairReport pair;
            pair.model_a = roster[i];
            pair.model_b = roster[j];
            pair.series.model_a = roster[i];
            pair.series.model_b = roster[j];
            if (it != cells.end()) {
                pair.series.wins_a = it->second.first;
                pair.series.wins_b = it->second.second;
            } else if (rit != cells.end()) {
                pair.series.wins_a = rit->second.second;
                pair.series.wins_b = rit->second.first;
            } else {
                continue;  // no self cell in the fixture unless given
            }
            pair.series.ties = topics - pair.series.wins_a - pair.series.wins_b;
            pair.decided = topics;
            bundle.pairs.push_back(std::move(pair));
        }
    }
    return bundle;
}

}  // namespace

TEST_CASE("matrix rendering reproduces the reference fixture cells") {
    auto doc = test_support::read_json(test_support::data_path("reference_matrix.json"));
    std::vector<ModelId> roster;
    for (const auto& name : doc.at("models")) {
        roster.push_back(ModelId{name.get<std::string>(), "api"});
    }
    std::map<std::pair<std::string, std::string>, std::pair<int, int>> cells;
    for (const auto& cell : doc.at("cells")) {
        cells[{cell.at("a").get<std::string>(), cell.at("b").get<std::string>()}] = {
            cell.at("wins_a").get<int>(), cell.at("wins_b").get<int>()};
    }
    ReportBundle bundle =
        bundle_from_series(roster, cells, doc.at("topics_per_pair").get<int>());
    std::string md = render_matrix_markdown(bundle);
    // the row for the weakest first-row model carries its 0-9 cell
    CHECK(md.find(" 0-9 ") != std::string::npos);
    std::string csv = render_matrix_csv(bundle);
    CHECK(csv.find(",0-9") != std::string::npos);

    // permuting the roster relocates cells but keeps every value
    std::vector<ModelId> reversed(roster.rbegin(), roster.rend());
    ReportBundle permuted =
        bundle_from_series(reversed, cells, doc.at("topics_per_pair").get<int>());
    std::string md2 = render_matrix_markdown(permuted);
    for (const auto& [key, wins] : cells) {
        // each unordered pair's tally appears in exactly one orientation
        std::string fwd = " " + std::to_string(wins.first) + "-" +
                          std::to_string(wins.second) + " ";
        std::string rev = " " + std::to_string(wins.second) + "-" +
                          std::to_string(wins.first) + " ";
        CHECK((md2.find(fwd) != std::string::npos ||
               md2.find(rev) != std::string::npos));
    }
}

TEST_CASE("roster permutation relocates cells without changing values") {
    TempDir tmp;
    fs::path file = run_small_tournament(tmp.path, 2);
    RunStore store = RunStore::open(file);
    ReportBundle bundle = build_report(store);

    std::map<std::pair<std::string, std::string>, std::string> cells;
    for (const PairReport& p : bundle.pairs) {
        cells[{p.model_a.name, p.model_b.name}] =
            std::to_string(p.series.wins_a) + "-" + std::to_string(p.series.wins_b);
    }
    // rendering with the same store twice yields the same cells (pure),
    // and each unordered pair appears exactly once
    CHECK(cells.size() == 3);
    ReportBundle again = build_report(store);
    for (const PairReport& p : again.pairs) {
        CHECK(cells.at({p.model_a.name, p.model_b.name}) ==
              std::to_string(p.series.wins_a) + "-" + std::to_string(p.series.wins_b));
    }
}
