#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "debatebench/errors.hpp"
#include "debatebench/gateway.hpp"
#include "debatebench/report.hpp"
#include "debatebench/runner.hpp"
#include "debatebench/store.hpp"
#include "debatebench/templates.hpp"
#include "debatebench/tournament.hpp"

namespace {

using namespace debatebench;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

std::vector<ModelId> load_roster_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open roster file: " + file.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("roster file is not valid JSON: " + std::string(e.what()));
    }
    std::vector<ModelId> roster;
    for (const auto& entry : doc) {
        roster.push_back(ModelId{entry.at("name").get<std::string>(),
                                 entry.at("backend").get<std::string>()});
    }
    return roster;
}

TemplateSet load_templates(const std::string& dir) {
    return dir.empty() ? TemplateSet::defaults() : TemplateSet::load_dir(dir);
}

std::vector<Topic> load_topic_list(const std::string& file) {
    return file.empty() ? default_topics() : load_topics(file);
}

struct RunArgs {
    std::string config_file;
    std::string store_file;
    std::string topics_file;
    std::string templates_dir;
    std::string judge_spec;
    std::vector<std::string> model_specs;
    std::string roster_file;
    std::string run_id;
    std::string report_dir;
    int rounds = 4;
    int workers = 4;
    bool self_play = false;
    bool resume = false;
    int max_debates = -1;
};

int cmd_run(const RunArgs& args) {
    GatewayConfig config = GatewayConfig::from_file(args.config_file);
    Gateway gateway(config);
    std::unique_ptr<Clock> clock = config.clock.make();

    std::vector<Topic> topics = load_topic_list(args.topics_file);
    TemplateSet templates = load_templates(args.templates_dir);

    std::vector<ModelId> roster;
    if (!args.roster_file.empty()) roster = load_roster_file(args.roster_file);
    for (const std::string& spec : args.model_specs) roster.push_back(ModelId::parse(spec));
    if (roster.empty()) throw ConfigError("no models given (--model or --roster)");
    ModelId judge = ModelId::parse(args.judge_spec);

    for (const ModelId& m : roster) {
        if (!gateway.has_backend(m.backend_alias)) {
            throw ConfigError("model " + m.name + " references unknown backend alias \"" +
                              m.backend_alias + "\"");
        }
    }
    if (!gateway.has_backend(judge.backend_alias)) {
        throw ConfigError("judge references unknown backend alias \"" +
                          judge.backend_alias + "\"");
    }
    if (args.rounds < 2 || args.rounds % 2 != 0) {
        throw ConfigError("--rounds must be even and >= 2");
    }

    RunManifest manifest;
    manifest.roster = roster;
    manifest.judge_model = judge;
    manifest.rounds = args.rounds;
    manifest.self_play = args.self_play;
    manifest.topic_count = static_cast<int>(topics.size());
    manifest.topics_digest = topics_digest(topics);
    manifest.templates_digest = templates.digest();
    manifest.gateway_digest = config.digest;
    if (!args.run_id.empty()) {
        manifest.run_id = args.run_id;
    } else {
        std::string blob = manifest.topics_digest + manifest.templates_digest +
                           manifest.gateway_digest + judge.name +
                           std::to_string(args.rounds) +
                           (args.self_play ? "sp" : "");
        for (const ModelId& m : roster) blob += m.name + "@" + m.backend_alias + ";";
        manifest.run_id = "run-" + fnv1a64_hex(blob);
    }

    std::filesystem::path store_path(args.store_file);
    std::optional<RunStore> store;
    if (std::filesystem::exists(store_path)) {
        if (!args.resume) {
            throw ConfigError("store file exists; pass --resume to continue: " +
                              store_path.string());
        }
        store = RunStore::open(store_path);
        store->manifest().verify_compatible(manifest);
    } else {
        store = RunStore::create(store_path, manifest);
    }

    std::vector<Pairing> full_schedule = schedule(roster, topics, args.self_play);
    std::vector<Pairing> plan = resume_plan(*store, full_schedule);

    RunnerOptions options;
    options.workers = args.workers;
    if (args.max_debates >= 0) options.max_debates = args.max_debates;

    RunSummary summary =
        run_tournament(*store, plan, templates, gateway, judge, *clock, options);

    std::printf("debates scheduled: %zu, planned this run: %d, attempted: %d, "
                "completed: %d, failed: %d, judge retries pending: %d, "
                "unrecoverable verdicts: %d\n",
                full_schedule.size(), summary.planned, summary.attempted,
                summary.completed, summary.debate_failures, summary.judge_call_failures,
                summary.unrecoverable);

    ReportBundle bundle = build_report(*store);
    if (!args.report_dir.empty()) {
        write_reports(bundle, args.report_dir);
        std::printf("reports written to %s\n", args.report_dir.c_str());
    }
    std::fputs(render_matrix_markdown(bundle).c_str(), stdout);

    bool complete = true;
    for (const Pairing& p : full_schedule) {
        if (!store->has_verdict(make_debate_id(store->manifest().run_id, p),
                                judge.name)) {
            complete = false;
            break;
        }
    }
    return complete ? kExitOk : kExitPartial;
}

struct RejudgeArgs {
    std::string config_file;
    std::string store_file;
    std::string templates_dir;
    std::string judge_spec;
    std::string pair_filter;
    int workers = 4;
};

int cmd_rejudge(const RejudgeArgs& args) {
    GatewayConfig config = GatewayConfig::from_file(args.config_file);
    Gateway gateway(config);
    std::unique_ptr<Clock> clock = config.clock.make();
    TemplateSet templates = load_templates(args.templates_dir);
    ModelId judge = ModelId::parse(args.judge_spec);
    if (!gateway.has_backend(judge.backend_alias)) {
        throw ConfigError("judge references unknown backend alias \"" +
                          judge.backend_alias + "\"");
    }

    RunStore store = RunStore::open(args.store_file);
    std::optional<std::pair<std::string, std::string>> filter;
    if (!args.pair_filter.empty()) {
        size_t colon = args.pair_filter.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("--pair expects \"modelA:modelB\"");
        }
        filter = std::make_pair(args.pair_filter.substr(0, colon),
                                args.pair_filter.substr(colon + 1));
    }

    RejudgeSummary summary =
        rejudge(store, templates, gateway, judge, *clock, filter, args.workers);
    std::printf("re-judged: %d new verdicts, %d already present, %d unrecoverable, "
                "%d call failures\n",
                summary.evaluated, summary.skipped, summary.unrecoverable,
                summary.call_failures);

    const std::string& original = store.manifest().judge_model.name;
    if (original != judge.name) {
        Agreement agreement = judge_agreement(store, original, judge.name);
        if (agreement.compared > 0) {
            std::printf("winner agreement with %s: %d/%d (%.1f%%)\n", original.c_str(),
                        agreement.agreed, agreement.compared, 100.0 * agreement.ratio());
        }
    }
    return (summary.unrecoverable == 0 && summary.call_failures == 0) ? kExitOk
                                                                      : kExitPartial;
}

int cmd_rank(const std::string& store_file, const std::string& judge_name,
             const std::string& manual_file) {
    RunStore store = RunStore::open(store_file);
    ReportOptions options;
    options.judge_name = judge_name;
    if (!manual_file.empty()) options.manual = load_manual_verdicts(manual_file);
    ReportBundle bundle = build_report(store, options);
    std::fputs(render_ranking_markdown(bundle).c_str(), stdout);
    return bundle.provisional ? kExitPartial : kExitOk;
}

int cmd_report(const std::string& store_file, const std::string& out_dir,
               const std::string& judge_name, const std::string& manual_file) {
    RunStore store = RunStore::open(store_file);
    ReportOptions options;
    options.judge_name = judge_name;
    if (!manual_file.empty()) options.manual = load_manual_verdicts(manual_file);
    ReportBundle bundle = build_report(store, options);
    write_reports(bundle, out_dir);
    std::printf("wrote matrix.md, matrix.csv, ranking.md, ranking.csv and %zu pair "
                "pages under %s\n",
                bundle.pairs.size(), out_dir.c_str());
    return bundle.provisional ? kExitPartial : kExitOk;
}

int cmd_verdict_set(const std::string& store_file, const std::string& debate_id,
                    const std::string& s1, const std::string& s2,
                    const std::string& winner, const std::string& judge_name) {
    RunStore store = RunStore::open(store_file);
    if (store.find_debate(debate_id) == nullptr) {
        throw ConfigError("no stored debate with id " + debate_id);
    }
    auto score1 = Score::parse(s1);
    auto score2 = Score::parse(s2);
    if (!score1 || !score2) {
        throw ConfigError("scores must be in [1,10] with at most one decimal place");
    }
    std::string judge = judge_name.empty() ? store.manifest().judge_model.name : judge_name;

    JudgeVerdict verdict{*score1, *score2, winner_from_token(winner), ParseMode::Manual,
                         ModelId{judge, ""}, "(manual entry)"};
    SystemClock clock;
    store.append(StoredVerdict{debate_id, verdict, iso8601_utc(clock.now())});
    std::printf("manual verdict recorded for %s (judge %s)\n", debate_id.c_str(),
                judge.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pairwise LLM benchmarking through judged multi-round debates"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run a tournament and persist it");
    run->add_option("--config", run_args.config_file, "gateway config JSON")->required();
    run->add_option("--store", run_args.store_file, "run store file (JSON Lines)")
        ->required();
    run->add_option("--topics", run_args.topics_file,
                    "topic file (default: bundled list)");
    run->add_option("--templates", run_args.templates_dir,
                    "template directory (default: bundled set)");
    run->add_option("--judge", run_args.judge_spec, "judge model, name@alias")->required();
    run->add_option("--model", run_args.model_specs, "roster model, name@alias");
    run->add_option("--roster", run_args.roster_file, "roster JSON file");
    run->add_option("--rounds", run_args.rounds, "debate rounds (even)");
    run->add_option("--workers", run_args.workers, "concurrent debates");
    run->add_flag("--self-play", run_args.self_play, "schedule each model against itself");
    run->add_flag("--resume", run_args.resume, "continue an existing store");
    run->add_option("--run-id", run_args.run_id, "override the derived run id");
    run->add_option("--max-debates", run_args.max_debates,
                    "stop after N debates this invocation (batch quota)");
    run->add_option("--report-dir", run_args.report_dir, "also write reports here");

    RejudgeArgs rejudge_args;
    CLI::App* rejudge_cmd =
        app.add_subcommand("rejudge", "evaluate stored transcripts with another judge");
    rejudge_cmd->add_option("--config", rejudge_args.config_file, "gateway config JSON")
        ->required();
    rejudge_cmd->add_option("--store", rejudge_args.store_file, "run store file")
        ->required();
    rejudge_cmd->add_option("--templates", rejudge_args.templates_dir,
                            "template directory (default: bundled set)");
    rejudge_cmd->add_option("--judge", rejudge_args.judge_spec, "judge model, name@alias")
        ->required();
    rejudge_cmd->add_option("--pair", rejudge_args.pair_filter,
                            "only this series, \"modelA:modelB\"");
    rejudge_cmd->add_option("--workers", rejudge_args.workers, "concurrent judge calls");

    std::string rank_store, rank_judge, rank_manual;
    CLI::App* rank = app.add_subcommand("rank", "print the ranking table");
    rank->add_option("--store", rank_store, "run store file")->required();
    rank->add_option("--judge", rank_judge, "judge name (default: manifest judge)");
    rank->add_option("--manual-file", rank_manual, "manual verdicts JSON to merge");

    std::string report_store, report_out, report_judge, report_manual;
    CLI::App* report = app.add_subcommand("report", "write the report bundle");
    report->add_option("--store", report_store, "run store file")->required();
    report->add_option("--out", report_out, "output directory")->required();
    report->add_option("--judge", report_judge, "judge name (default: manifest judge)");
    report->add_option("--manual-file", report_manual, "manual verdicts JSON to merge");

    std::string verdict_store, verdict_id, verdict_s1, verdict_s2, verdict_winner,
        verdict_judge;
    CLI::App* verdict = app.add_subcommand("verdict", "verdict utilities");
    CLI::App* verdict_set =
        verdict->add_subcommand("set", "record a manual verdict for a stored debate");
    verdict_set->add_option("debate_id", verdict_id, "debate id")->required();
    verdict_set->add_option("--store", verdict_store, "run store file")->required();
    verdict_set->add_option("--s1", verdict_s1, "score for side 1")->required();
    verdict_set->add_option("--s2", verdict_s2, "score for side 2")->required();
    verdict_set->add_option("--winner", verdict_winner, "1, 2 or draw")->required();
    verdict_set->add_option("--judge", verdict_judge,
                            "judge name (default: manifest judge)");
    verdict->require_subcommand(1);

    try {
        app.parse(argc, argv);
        if (*run) return cmd_run(run_args);
        if (*rejudge_cmd) return cmd_rejudge(rejudge_args);
        if (*rank) return cmd_rank(rank_store, rank_judge, rank_manual);
        if (*report) return cmd_report(report_store, report_out, report_judge,
                                       report_manual);
        if (*verdict_set) {
            return cmd_verdict_set(verdict_store, verdict_id, verdict_s1, verdict_s2,
                                   verdict_winner, verdict_judge);
        }
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const TemplateError& e) {
        std::fprintf(stderr, "template error: %s\n", e.what());
        return kExitConfig;
    } catch (const ManifestMismatch& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitPartial;
    }
}
