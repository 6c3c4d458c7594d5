#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "debatebench/gateway.hpp"
#include "debatebench/templates.hpp"
#include "debatebench/topics.hpp"
#include "debatebench/util.hpp"

namespace debatebench {

/// One debate to run: a topic, the first and second mover, and the round
/// count (even, at least 2 — the second mover always concludes).
/// Self-play (first_mover == second_mover) is legal.
struct DebateSpec {
    Topic topic;
    ModelId first_mover;
    ModelId second_mover;
    int rounds = 4;

    void validate() const;
};

struct Turn {
    int index = 0;  // 1..T
    SideRole speaker = SideRole::First;
    ModelId model;
    std::string system_prompt;
    std::string user_prompt;
    std::string response;
    std::int64_t latency_ms = 0;
    int attempts = 1;
};

struct Transcript {
    DebateSpec spec;
    std::vector<Turn> turns;
    std::string started_at;
    std::string finished_at;

    std::vector<std::string> responses() const;
    /// Enforces the structural invariants: turns contiguous 1..T,
    /// speakers alternating starting with First, responses non-empty.
    void validate() const;
};

/// Runs one debate turn by turn. Turn k's prompts are rendered from the
/// template set and the prior responses; a gateway failure aborts the
/// debate with TurnFailed(k) and no transcript is produced.
Transcript run_debate(const DebateSpec& spec, const TemplateSet& templates,
                      Gateway& gateway, const Clock& clock);

/// Stage used for turn k of a debate (Opening, FirstResponse, then
/// Continuation).
Stage stage_for_turn(int turn_index);

}  // namespace debatebench
