#pragma once

#include <optional>
#include <string>
#include <vector>

#include "debatebench/gateway.hpp"
#include "debatebench/judge.hpp"
#include "debatebench/topics.hpp"

namespace debatebench {

enum class DebateOrder { AFirst, BFirst };

std::string order_token(DebateOrder o);
DebateOrder order_from_token(const std::string& token);

/// One scheduled debate: model a vs model b on a topic, with the given
/// seat order. Each (pair, topic) is scheduled twice, once per order,
/// to cancel first-mover and side-difficulty bias.
struct Pairing {
    int pair_index = 0;  // position of the unordered pair in the schedule
    ModelId model_a;
    ModelId model_b;
    Topic topic;
    DebateOrder order = DebateOrder::AFirst;

    ModelId first_mover() const {
        return order == DebateOrder::AFirst ? model_a : model_b;
    }
    ModelId second_mover() const {
        return order == DebateOrder::AFirst ? model_b : model_a;
    }
};

/// Full tournament schedule: for every unordered pair of the roster
/// (plus self-pairs when include_self_play) and every topic, exactly one
/// AFirst and one BFirst pairing, in deterministic (pair, topic, order)
/// order.
std::vector<Pairing> schedule(const std::vector<ModelId>& roster,
                              const std::vector<Topic>& topics,
                              bool include_self_play);

enum class TopicResult { WinA, WinB, Tie };

std::string topic_result_token(TopicResult r);
TopicResult topic_result_from_token(const std::string& token);

/// Decides a topic from the two verdict winners. The rule: a model that
/// wins both debates (or wins one while the judge calls the other a
/// draw) takes the topic; a split or a double draw is a tie.
/// `home_order`/`away_order` say which model sat in seat 1 of each
/// debate and must differ. Throws MissingVerdict when a winner is
/// absent.
TopicResult decide_topic_outcome(const std::optional<Winner>& home,
                                 const std::optional<Winner>& away,
                                 DebateOrder home_order, DebateOrder away_order);

struct TopicOutcome {
    int topic_index = 0;
    TopicResult result = TopicResult::Tie;
};

struct SeriesResult {
    ModelId model_a;
    ModelId model_b;
    int wins_a = 0;
    int wins_b = 0;
    int ties = 0;

    int topics() const { return wins_a + wins_b + ties; }
};

/// Tallies one pair's topic outcomes. Expects exactly one outcome per
/// topic index in `topic_indices` (DuplicateTopic / MissingTopic
/// otherwise).
SeriesResult aggregate_series(const ModelId& model_a, const ModelId& model_b,
                              const std::vector<TopicOutcome>& outcomes,
                              const std::vector<int>& topic_indices);

struct RankingEntry {
    ModelId model;
    int series_wins = 0;
    int total_topic_wins = 0;
    int rank = 0;
};

struct Ranking {
    std::vector<RankingEntry> entries;  // best first
};

/// Copeland-style ranking: each pair's strict topic-win leader gains one
/// series win (an even split credits neither side). Self-play series are
/// accepted in the input but never counted. Entries sort by series wins,
/// then total topic wins, then model name; the rank number is shared by
/// entries equal on the first two keys. Throws IncompleteSeriesSet when
/// a roster pair is missing.
Ranking compute_ranking(const std::vector<SeriesResult>& series,
                        const std::vector<ModelId>& roster);

}  // namespace debatebench
