#include "debatebench/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "debatebench/errors.hpp"

namespace debatebench {

using nlohmann::json;

namespace {

std::string cell_text(const SeriesResult& s) {
    return std::to_string(s.wins_a) + "-" + std::to_string(s.wins_b);
}

std::string winner_name(const PairReport& pair, Winner w, DebateOrder order) {
    if (w == Winner::Draw) return "Draw";
    bool side1 = w == Winner::Side1;
    bool a_first = order == DebateOrder::AFirst;
    return (side1 == a_first) ? pair.model_a.name : pair.model_b.name;
}

std::string overall_name(const PairReport& pair, TopicResult r) {
    switch (r) {
        case TopicResult::WinA: return pair.model_a.name;
        case TopicResult::WinB: return pair.model_b.name;
        case TopicResult::Tie: return "Tie";
    }
    return "Tie";
}

std::string sanitize_filename(const std::string& name) {
    std::string out;
    for (char c : name) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.';
        out += ok ? c : '_';
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageFailure("cannot write report file: " + path.string());
    out << content;
}

}  // namespace

ReportBundle build_report(const RunStore& store, const ReportOptions& options) {
    const RunManifest& manifest = store.manifest();
    ReportBundle bundle;
    bundle.judge_name =
        options.judge_name.empty() ? manifest.judge_model.name : options.judge_name;
    bundle.roster = manifest.roster;
    bundle.topic_count = manifest.topic_count;

    int manual_used = 0;
    auto verdict_for = [&](const std::string& id) -> std::optional<JudgeVerdict> {
        auto manual = options.manual.find(id);
        if (manual != options.manual.end()) {
            ++manual_used;
            return JudgeVerdict{manual->second.score1, manual->second.score2,
                                manual->second.winner, ParseMode::Manual,
                                ModelId{bundle.judge_name, ""}, ""};
        }
        if (const StoredVerdict* v = store.find_verdict(id, bundle.judge_name)) {
            return v->verdict;
        }
        return std::nullopt;
    };

    std::vector<SeriesResult> ranking_input;
    for (size_t i = 0; i < bundle.roster.size(); ++i) {
        for (size_t j = i; j < bundle.roster.size(); ++j) {
            bool self = i == j;
            if (self && !manifest.self_play) continue;
            PairReport pair;
            pair.model_a = bundle.roster[i];
            pair.model_b = bundle.roster[j];
            pair.series.model_a = pair.model_a;
            pair.series.model_b = pair.model_b;
            for (int topic = 1; topic <= bundle.topic_count; ++topic) {
                Pairing p;
                p.model_a = pair.model_a;
                p.model_b = pair.model_b;
                p.topic.index = topic;

                PairTopicRow row;
                row.topic_index = topic;
                p.order = DebateOrder::AFirst;
                std::string home_id = make_debate_id(manifest.run_id, p);
                p.order = DebateOrder::BFirst;
                std::string away_id = make_debate_id(manifest.run_id, p);
                row.home = verdict_for(home_id);
                row.away = verdict_for(away_id);

                if (row.home && row.away) {
                    row.overall = decide_topic_outcome(row.home->winner, row.away->winner,
                                                       DebateOrder::AFirst,
                                                       DebateOrder::BFirst);
                    ++pair.decided;
                    switch (*row.overall) {
                        case TopicResult::WinA: ++pair.series.wins_a; break;
                        case TopicResult::WinB: ++pair.series.wins_b; break;
                        case TopicResult::Tie: ++pair.series.ties; break;
                    }
                } else {
                    bundle.provisional = true;
                }

                auto note_inconsistent = [&](const std::optional<JudgeVerdict>& v,
                                             const std::string& id) {
                    if (v && v->parse_mode != ParseMode::Manual && !v->consistency_flag()) {
                        bundle.anomalies.push_back(
                            "verdict " + id + ": declared winner (" +
                            winner_token(v->winner) + ") contradicts score argmax (" +
                            v->score1.str() + " vs " + v->score2.str() + ")");
                    }
                };
                note_inconsistent(row.home, home_id);
                note_inconsistent(row.away, away_id);

                pair.rows.push_back(std::move(row));
            }

            if (self) {
                // sanity check only: a lopsided self-play series hints at
                // seat or side bias
                int imbalance = std::abs(pair.series.wins_a - pair.series.wins_b);
                int threshold = std::max(1, bundle.topic_count / 5);
                if (imbalance > threshold) {
                    bundle.anomalies.push_back(
                        "self-play series for " + pair.model_a.name + " is imbalanced: " +
                        cell_text(pair.series) + " over " +
                        std::to_string(pair.decided) + " topics");
                }
            } else {
                ranking_input.push_back(pair.series);
            }
            bundle.pairs.push_back(std::move(pair));
        }
    }

    for (const StoredJudgeFailure& f : store.judge_failures()) {
        if (f.judge_model.name == bundle.judge_name &&
            options.manual.find(f.debate_id) == options.manual.end()) {
            bundle.anomalies.push_back("unrecoverable verdict for " + f.debate_id +
                                       "; enter one with `verdict set`");
        }
    }
    if (manual_used > 0) {
        bundle.anomalies.push_back(std::to_string(manual_used) +
                                   " manual verdict(s) merged at aggregation time");
    }

    bundle.ranking = compute_ranking(ranking_input, bundle.roster);
    return bundle;
}

std::string render_matrix_markdown(const ReportBundle& bundle) {
    std::map<std::pair<std::string, std::string>, const PairReport*> by_pair;
    for (const PairReport& p : bundle.pairs) {
        by_pair[{p.model_a.name, p.model_b.name}] = &p;
    }

    std::ostringstream out;
    out << "# Win matrix (judge: " << bundle.judge_name << ")\n\n";
    if (bundle.provisional) {
        out << "**Provisional:** some scheduled debates have no verdict yet; "
               "cells count decided topics only.\n\n";
    }
    out << "Each cell is `wins(row)-wins(column)` over the shared topics; the "
           "diagonal tallies self-play (seat A vs seat B).\n\n";
    out << "|  |";
    for (const ModelId& m : bundle.roster) out << " " << m.name << " |";
    out << "\n|---|";
    for (size_t i = 0; i < bundle.roster.size(); ++i) out << "---|";
    out << "\n";
    for (size_t i = 0; i < bundle.roster.size(); ++i) {
        out << "| **" << bundle.roster[i].name << "** |";
        for (size_t j = 0; j < bundle.roster.size(); ++j) {
            auto it = by_pair.find({bundle.roster[i].name, bundle.roster[j].name});
            if (j < i || it == by_pair.end()) {
                out << "  |";
            } else {
                out << " " << cell_text(it->second->series) << " |";
            }
        }
        out << "\n";
    }

    if (!bundle.anomalies.empty()) {
        out << "\n## Annotations\n\n";
        for (const std::string& a : bundle.anomalies) out << "- " << a << "\n";
    }
    return out.str();
}

std::string render_matrix_csv(const ReportBundle& bundle) {
    std::map<std::pair<std::string, std::string>, const PairReport*> by_pair;
    for (const PairReport& p : bundle.pairs) {
        by_pair[{p.model_a.name, p.model_b.name}] = &p;
    }
    std::ostringstream out;
    out << "model";
    for (const ModelId& m : bundle.roster) out << "," << m.name;
    out << "\n";
    for (size_t i = 0; i < bundle.roster.size(); ++i) {
        out << bundle.roster[i].name;
        for (size_t j = 0; j < bundle.roster.size(); ++j) {
            auto it = by_pair.find({bundle.roster[i].name, bundle.roster[j].name});
            out << ",";
            if (j >= i && it != by_pair.end()) out << cell_text(it->second->series);
        }
        out << "\n";
    }
    return out.str();
}

std::string render_ranking_markdown(const ReportBundle& bundle) {
    std::ostringstream out;
    out << "# Ranking (judge: " << bundle.judge_name << ")\n\n";
    if (bundle.provisional) out << "**Provisional ranking.**\n\n";
    out << "| Rank | Model | Series Wins | Topic Wins |\n";
    out << "|---|---|---|---|\n";
    for (const RankingEntry& e : bundle.ranking.entries) {
        out << "| " << e.rank << " | " << e.model.name << " | " << e.series_wins << " | "
            << e.total_topic_wins << " |\n";
    }
    return out.str();
}

std::string render_ranking_csv(const ReportBundle& bundle) {
    std::ostringstream out;
    out << "rank,model,series_wins,topic_wins\n";
    for (const RankingEntry& e : bundle.ranking.entries) {
        out << e.rank << "," << e.model.name << "," << e.series_wins << ","
            << e.total_topic_wins << "\n";
    }
    return out.str();
}

std::string render_pair_markdown(const PairReport& pair) {
    std::ostringstream out;
    out << "# " << pair.model_a.name << " vs " << pair.model_b.name << "\n\n";
    out << "Home: " << pair.model_a.name << " opens (seat 1). Away: " << pair.model_b.name
        << " opens.\n\n";
    out << "| Topic | Home Winner | S1 | S2 | Away Winner | S1 | S2 | Overall |\n";
    out << "|---|---|---|---|---|---|---|---|\n";
    for (const PairTopicRow& row : pair.rows) {
        out << "| " << row.topic_index << " | ";
        if (row.home) {
            out << winner_name(pair, row.home->winner, DebateOrder::AFirst) << " | "
                << row.home->score1.str() << " | " << row.home->score2.str() << " | ";
        } else {
            out << "- | - | - | ";
        }
        if (row.away) {
            out << winner_name(pair, row.away->winner, DebateOrder::BFirst) << " | "
                << row.away->score1.str() << " | " << row.away->score2.str() << " | ";
        } else {
            out << "- | - | - | ";
        }
        if (row.overall) {
            out << overall_name(pair, *row.overall);
        } else {
            out << "-";
        }
        out << " |\n";
    }
    out << "\nSeries: " << pair.model_a.name << " " << pair.series.wins_a << ", "
        << pair.model_b.name << " " << pair.series.wins_b << ", ties "
        << pair.series.ties << " (" << pair.decided << " topics decided)\n";
    return out.str();
}

void write_reports(const ReportBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "pairs");
    write_file(dir / "matrix.md", render_matrix_markdown(bundle));
    write_file(dir / "matrix.csv", render_matrix_csv(bundle));
    write_file(dir / "ranking.md", render_ranking_markdown(bundle));
    write_file(dir / "ranking.csv", render_ranking_csv(bundle));
    for (const PairReport& pair : bundle.pairs) {
        std::string name = sanitize_filename(pair.model_a.name) + "_vs_" +
                           sanitize_filename(pair.model_b.name) + ".md";
        write_file(dir / "pairs" / name, render_pair_markdown(pair));
    }
}

Agreement judge_agreement(const RunStore& store, const std::string& judge_a,
                          const std::string& judge_b) {
    Agreement agreement;
    for (const auto& [id, debate] : store.debates()) {
        const StoredVerdict* va = store.find_verdict(id, judge_a);
        const StoredVerdict* vb = store.find_verdict(id, judge_b);
        if (va == nullptr || vb == nullptr) continue;
        ++agreement.compared;
        if (va->verdict.winner == vb->verdict.winner) ++agreement.agreed;
    }
    return agreement;
}

std::map<std::string, VerdictTriple> load_manual_verdicts(
    const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open manual verdict file: " + file.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("manual verdict file is not valid JSON: " + std::string(e.what()));
    }
    std::map<std::string, VerdictTriple> out;
    for (const auto& [id, entry] : doc.items()) {
        auto score = [&](const char* key) {
            const json& v = entry.at(key);
            std::optional<Score> s =
                v.is_string() ? Score::parse(v.get<std::string>())
                              : Score::parse(json(v).dump());
            if (!s) throw ConfigError("manual verdict for " + id + ": bad " + key);
            return *s;
        };
        VerdictTriple triple{score("score1"), score("score2"),
                             winner_from_token(entry.at("winner").get<std::string>())};
        out.emplace(id, triple);
    }
    return out;
}

}  // namespace debatebench
