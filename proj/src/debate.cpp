#include "debatebench/debate.hpp"

#include "debatebench/errors.hpp"

namespace debatebench {

void DebateSpec::validate() const {
    topic.validate();
    if (rounds < 2 || rounds % 2 != 0) {
        throw ConfigError("rounds must be even and >= 2, got " + std::to_string(rounds));
    }
    if (first_mover.name.empty() || second_mover.name.empty()) {
        throw ConfigError("debate spec requires both movers");
    }
}

std::vector<std::string> Transcript::responses() const {
    std::vector<std::string> out;
    out.reserve(turns.size());
    for (const Turn& t : turns) out.push_back(t.response);
    return out;
}

void Transcript::validate() const {
    spec.validate();
    if (static_cast<int>(turns.size()) != spec.rounds) {
        throw IncompleteTranscript("transcript has " + std::to_string(turns.size()) +
                                   " turns, expected " + std::to_string(spec.rounds));
    }
    for (size_t i = 0; i < turns.size(); ++i) {
        const Turn& t = turns[i];
        if (t.index != static_cast<int>(i) + 1) {
            throw IncompleteTranscript("turn indices must be contiguous from 1");
        }
        SideRole expected = (t.index % 2 == 1) ? SideRole::First : SideRole::Second;
        if (t.speaker != expected) {
            throw IncompleteTranscript("turn " + std::to_string(t.index) +
                                       " has the wrong speaker");
        }
        if (t.response.empty()) {
            throw IncompleteTranscript("turn " + std::to_string(t.index) +
                                       " has an empty response");
        }
    }
}

Stage stage_for_turn(int turn_index) {
    if (turn_index == 1) return Stage::Opening;
    if (turn_index == 2) return Stage::FirstResponse;
    return Stage::Continuation;
}

Transcript run_debate(const DebateSpec& spec, const TemplateSet& templates,
                      Gateway& gateway, const Clock& clock) {
    spec.validate();
    Transcript transcript;
    transcript.spec = spec;
    transcript.started_at = iso8601_utc(clock.now());

    std::vector<std::string> history;
    for (int k = 1; k <= spec.rounds; ++k) {
        SideRole speaker = (k % 2 == 1) ? SideRole::First : SideRole::Second;
        Turn turn;
        turn.index = k;
        turn.speaker = speaker;
        turn.model = speaker == SideRole::First ? spec.first_mover : spec.second_mover;
        turn.system_prompt =
            render_debater_system(templates, spec.topic, speaker, stage_for_turn(k));
        turn.user_prompt = render_debater_prompt(templates, history, speaker);

        CompletionRequest request;
        request.model = turn.model;
        request.system_prompt = turn.system_prompt;
        request.user_prompt = turn.user_prompt;
        try {
            CompletionResult result = gateway.complete(request);
            turn.response = result.text;
            turn.latency_ms = result.latency_ms;
            turn.attempts = result.attempts;
        } catch (const GatewayError& e) {
            throw TurnFailed(k, e.what());
        }
        if (trim(turn.response).empty()) {
            throw TurnFailed(k, "blank completion");
        }
        history.push_back(turn.response);
        transcript.turns.push_back(std::move(turn));
    }

    transcript.finished_at = iso8601_utc(clock.now());
    transcript.validate();
    return transcript;
}

}  // namespace debatebench
