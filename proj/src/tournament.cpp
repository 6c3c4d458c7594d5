#include "debatebench/tournament.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "debatebench/errors.hpp"

namespace debatebench {

std::string order_token(DebateOrder o) {
    return o == DebateOrder::AFirst ? "a_first" : "b_first";
}

DebateOrder order_from_token(const std::string& token) {
    if (token == "a_first") return DebateOrder::AFirst;
    if (token == "b_first") return DebateOrder::BFirst;
    throw ConfigError("unknown debate order: " + token);
}

std::string topic_result_token(TopicResult r) {
    switch (r) {
        case TopicResult::WinA: return "win_a";
        case TopicResult::WinB: return "win_b";
        case TopicResult::Tie: return "tie";
    }
    return "tie";
}

TopicResult topic_result_from_token(const std::string& token) {
    if (token == "win_a") return TopicResult::WinA;
    if (token == "win_b") return TopicResult::WinB;
    if (token == "tie") return TopicResult::Tie;
    throw ConfigError("unknown topic result: " + token);
}

std::vector<Pairing> schedule(const std::vector<ModelId>& roster,
                              const std::vector<Topic>& topics,
                              bool include_self_play) {
    if (roster.empty()) throw EmptyRoster("roster is empty");
    if (topics.empty()) throw EmptyTopics("topic list is empty");
    std::set<std::string> names;
    for (const ModelId& m : roster) {
        if (!names.insert(m.name).second) {
            throw ConfigError("duplicate model name in roster: " + m.name);
        }
    }

    std::vector<Pairing> out;
    int pair_index = 0;
    for (size_t i = 0; i < roster.size(); ++i) {
        for (size_t j = i; j < roster.size(); ++j) {
            if (i == j && !include_self_play) continue;
            for (const Topic& topic : topics) {
                for (DebateOrder order : {DebateOrder::AFirst, DebateOrder::BFirst}) {
                    Pairing p;
                    p.pair_index = pair_index;
                    p.model_a = roster[i];
                    p.model_b = roster[j];
                    p.topic = topic;
                    p.order = order;
                    out.push_back(std::move(p));
                }
            }
            ++pair_index;
        }
    }
    return out;
}

namespace {

enum class Contender { A, B, Draw };

// Translates a verdict's seat-centric winner into the model it names.
Contender contender_of(Winner winner, DebateOrder order) {
    if (winner == Winner::Draw) return Contender::Draw;
    bool side1 = winner == Winner::Side1;
    bool a_first = order == DebateOrder::AFirst;
    return (side1 == a_first) ? Contender::A : Contender::B;
}

}  // namespace

TopicResult decide_topic_outcome(const std::optional<Winner>& home,
                                 const std::optional<Winner>& away,
                                 DebateOrder home_order, DebateOrder away_order) {
    if (!home || !away) {
        throw MissingVerdict(std::string("missing ") + (!home ? "home" : "away") +
                             " verdict");
    }
    if (home_order == away_order) {
        throw ConfigError("home and away debates must have opposite seat orders");
    }
    Contender h = contender_of(*home, home_order);
    Contender a = contender_of(*away, away_order);
    if (h == a) {
        // double draw is a tie; the same model twice is a win
        if (h == Contender::Draw) return TopicResult::Tie;
        return h == Contender::A ? TopicResult::WinA : TopicResult::WinB;
    }
    if (h == Contender::Draw) return a == Contender::A ? TopicResult::WinA : TopicResult::WinB;
    if (a == Contender::Draw) return h == Contender::A ? TopicResult::WinA : TopicResult::WinB;
    return TopicResult::Tie;  // one win each
}

SeriesResult aggregate_series(const ModelId& model_a, const ModelId& model_b,
                              const std::vector<TopicOutcome>& outcomes,
                              const std::vector<int>& topic_indices) {
    std::set<int> expected(topic_indices.begin(), topic_indices.end());
    std::set<int> seen;
    SeriesResult result;
    result.model_a = model_a;
    result.model_b = model_b;
    for (const TopicOutcome& o : outcomes) {
        if (!expected.count(o.topic_index)) {
            throw ConfigError("outcome for unscheduled topic " +
                              std::to_string(o.topic_index));
        }
        if (!seen.insert(o.topic_index).second) {
            throw DuplicateTopic("duplicate outcome for topic " +
                                 std::to_string(o.topic_index));
        }
        switch (o.result) {
            case TopicResult::WinA: ++result.wins_a; break;
            case TopicResult::WinB: ++result.wins_b; break;
            case TopicResult::Tie: ++result.ties; break;
        }
    }
    if (seen.size() != expected.size()) {
        for (int idx : expected) {
            if (!seen.count(idx)) {
                throw MissingTopic("no outcome for topic " + std::to_string(idx));
            }
        }
    }
    return result;
}

Ranking compute_ranking(const std::vector<SeriesResult>& series,
                        const std::vector<ModelId>& roster) {
    std::map<std::string, RankingEntry> entries;
    for (const ModelId& m : roster) {
        entries[m.name] = RankingEntry{m, 0, 0, 0};
    }

    std::set<std::pair<std::string, std::string>> covered;
    for (const SeriesResult& s : series) {
        if (!entries.count(s.model_a.name) || !entries.count(s.model_b.name)) {
            throw ConfigError("series references a model outside the roster: " +
                              s.model_a.name + " vs " + s.model_b.name);
        }
        if (s.model_a.name == s.model_b.name) continue;  // self-play: sanity only
        auto key = std::minmax(s.model_a.name, s.model_b.name);
        if (!covered.insert(key).second) {
            throw ConfigError("duplicate series for pair " + key.first + "/" + key.second);
        }
        entries[s.model_a.name].total_topic_wins += s.wins_a;
        entries[s.model_b.name].total_topic_wins += s.wins_b;
        if (s.wins_a > s.wins_b) {
            entries[s.model_a.name].series_wins += 1;
        } else if (s.wins_b > s.wins_a) {
            entries[s.model_b.name].series_wins += 1;
        }
        // equal topic wins: neither side gains
    }

    for (size_t i = 0; i < roster.size(); ++i) {
        for (size_t j = i + 1; j < roster.size(); ++j) {
            auto key = std::minmax(roster[i].name, roster[j].name);
            if (!covered.count(key)) {
                throw IncompleteSeriesSet("no series for pair " + key.first + "/" +
                                          key.second);
            }
        }
    }

    Ranking ranking;
    for (const auto& [name, entry] : entries) ranking.entries.push_back(entry);
    std::sort(ranking.entries.begin(), ranking.entries.end(),
              [](const RankingEntry& x, const RankingEntry& y) {
                  if (x.series_wins != y.series_wins) return x.series_wins > y.series_wins;
                  if (x.total_topic_wins != y.total_topic_wins) {
                      return x.total_topic_wins > y.total_topic_wins;
                  }
                  return x.model.name < y.model.name;
              });
    for (size_t i = 0; i < ranking.entries.size(); ++i) {
        if (i > 0 &&
            ranking.entries[i].series_wins == ranking.entries[i - 1].series_wins &&
            ranking.entries[i].total_topic_wins ==
                ranking.entries[i - 1].total_topic_wins) {
            ranking.entries[i].rank = ranking.entries[i - 1].rank;
        } else {
            ranking.entries[i].rank = static_cast<int>(i) + 1;
        }
    }
    return ranking;
}

}  // namespace debatebench
