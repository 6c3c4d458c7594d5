#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "debatebench/store.hpp"
#include "debatebench/tournament.hpp"

namespace debatebench {

struct ReportOptions {
    /// Judge whose verdicts are aggregated; defaults to the manifest judge.
    std::string judge_name;
    /// Manual verdict entries merged at aggregation time, keyed by
    /// debate id. They fill in (or override) stored verdicts and are
    /// counted as parse_mode=manual.
    std::map<std::string, VerdictTriple> manual;
};

/// Per-topic row of a pair page, mirroring the home/away table layout.
struct PairTopicRow {
    int topic_index = 0;
    std::optional<JudgeVerdict> home;  // model_a in seat 1
    std::optional<JudgeVerdict> away;  // model_b in seat 1
    std::optional<TopicResult> overall;
};

struct PairReport {
    ModelId model_a;
    ModelId model_b;
    std::vector<PairTopicRow> rows;
    SeriesResult series;   // over decided topics only
    int decided = 0;       // rows with both verdicts
};

/// Everything the renderers need, recomputed from the store alone.
struct ReportBundle {
    std::string judge_name;
    std::vector<ModelId> roster;
    int topic_count = 0;
    std::vector<PairReport> pairs;  // roster order, self-play included
    Ranking ranking;                // self-play excluded
    bool provisional = false;       // some scheduled debate lacks a verdict
    std::vector<std::string> anomalies;
};

ReportBundle build_report(const RunStore& store, const ReportOptions& options = {});

std::string render_matrix_markdown(const ReportBundle& bundle);
std::string render_matrix_csv(const ReportBundle& bundle);
std::string render_ranking_markdown(const ReportBundle& bundle);
std::string render_ranking_csv(const ReportBundle& bundle);
std::string render_pair_markdown(const PairReport& pair);

/// Writes matrix.md, matrix.csv, ranking.md, ranking.csv and
/// pairs/<a>_vs_<b>.md under `dir`.
void write_reports(const ReportBundle& bundle, const std::filesystem::path& dir);

/// Fraction of debates on which two judges declare the same winner.
struct Agreement {
    int agreed = 0;
    int compared = 0;
    double ratio() const { return compared == 0 ? 0.0 : double(agreed) / compared; }
};

Agreement judge_agreement(const RunStore& store, const std::string& judge_a,
                          const std::string& judge_b);

/// Parses the manual-verdict merge file: a JSON object mapping
/// debate_id -> {"score1": .., "score2": .., "winner": "1"|"2"|"draw"}.
std::map<std::string, VerdictTriple> load_manual_verdicts(
    const std::filesystem::path& file);

}  // namespace debatebench
