#include "debatebench/judge.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "debatebench/errors.hpp"

namespace debatebench {

std::string winner_token(Winner w) {
    switch (w) {
        case Winner::Side1: return "side1";
        case Winner::Side2: return "side2";
        case Winner::Draw: return "draw";
    }
    return "draw";
}

Winner winner_from_token(const std::string& token) {
    if (token == "side1" || token == "1") return Winner::Side1;
    if (token == "side2" || token == "2") return Winner::Side2;
    if (token == "draw" || token == "tie") return Winner::Draw;
    throw ConfigError("unknown winner token: " + token);
}

std::string parse_mode_token(ParseMode m) {
    switch (m) {
        case ParseMode::Strict: return "strict";
        case ParseMode::Recovered: return "recovered";
        case ParseMode::Manual: return "manual";
    }
    return "manual";
}

ParseMode parse_mode_from_token(const std::string& token) {
    if (token == "strict") return ParseMode::Strict;
    if (token == "recovered") return ParseMode::Recovered;
    if (token == "manual") return ParseMode::Manual;
    throw ConfigError("unknown parse mode: " + token);
}

Score Score::from_tenths(int tenths) {
    if (tenths < 10 || tenths > 100) {
        throw ConfigError("score out of range [1,10]: " + std::to_string(tenths / 10.0));
    }
    return Score(tenths);
}

std::optional<Score> Score::parse(const std::string& text) {
    if (text.empty()) return std::nullopt;
    size_t pos = 0;
    int whole = 0;
    size_t digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        whole = whole * 10 + (text[pos] - '0');
        ++pos;
        if (++digits > 2) return std::nullopt;
    }
    if (digits == 0) return std::nullopt;
    int tenth = 0;
    if (pos < text.size()) {
        if (text[pos] != '.') return std::nullopt;
        ++pos;
        if (pos + 1 != text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) {
            return std::nullopt;  // at most one decimal place
        }
        tenth = text[pos] - '0';
    }
    int tenths = whole * 10 + tenth;
    if (tenths < 10 || tenths > 100) return std::nullopt;
    return Score(tenths);
}

std::string Score::str() const {
    std::string s = std::to_string(tenths_ / 10);
    if (tenths_ % 10 != 0) {
        s += '.';
        s += static_cast<char>('0' + tenths_ % 10);
    }
    return s;
}

bool JudgeVerdict::consistency_flag() const {
    if (score1 > score2) return winner == Winner::Side1;
    if (score2 > score1) return winner == Winner::Side2;
    return winner == Winner::Draw;
}

std::string format_verdict(const VerdictTriple& triple) {
    if (triple.winner == Winner::Draw) {
        throw ConfigError("the canonical verdict format cannot express a draw");
    }
    return "side1: [[" + triple.score1.str() + "]], side2: [[" + triple.score2.str() +
           "]], winner: [[" + (triple.winner == Winner::Side1 ? "1" : "2") + "]]";
}

namespace {

const std::regex& strict_pattern() {
    static const std::regex re(
        R"(side1: \[\[([0-9]+(?:\.[0-9])?)\]\], side2: \[\[([0-9]+(?:\.[0-9])?)\]\], winner: \[\[([12])\]\])");
    return re;
}

// "side N" mention followed closely by a number, brackets optional.
const std::regex& side_score_pattern(int side) {
    auto make = [](int n) {
        return std::regex(R"(side\s*_?\s*)" + std::to_string(n) +
                              R"(\b[^0-9\n]{0,24}?\[{0,2}\s*([0-9]{1,2}(?:\.[0-9])?))",
                          std::regex::icase);
    };
    static const std::regex side1 = make(1);
    static const std::regex side2 = make(2);
    return side == 1 ? side1 : side2;
}

const std::regex& winner_pattern() {
    static const std::regex re(
        R"(winner(?:\s+is)?\s*[:=\-]?\s*\[{0,2}\s*(side\s*_?\s*1|side\s*_?\s*2|1|2|tie|draw)\b)",
        std::regex::icase);
    return re;
}

// Regex construction lazily initializes shared locale facet caches, which
// is not thread-safe in libstdc++; compile every pattern before any
// worker threads can reach the parsers.
const bool patterns_ready = [] {
    strict_pattern();
    side_score_pattern(1);
    side_score_pattern(2);
    winner_pattern();
    return true;
}();

std::string normalize_token(std::string token) {
    token.erase(std::remove_if(token.begin(), token.end(),
                               [](unsigned char c) { return c == ' ' || c == '_'; }),
                token.end());
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return token;
}

// Last in-range score attached to a "side N" mention, if any.
std::optional<Score> last_side_score(const std::string& text, int side) {
    const std::regex& re = side_score_pattern(side);
    std::optional<Score> found;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
         it != std::sregex_iterator(); ++it) {
        if (auto score = Score::parse((*it)[1].str())) found = score;
    }
    return found;
}

}  // namespace

VerdictTriple parse_verdict_strict(const std::string& text) {
    auto begin = std::sregex_iterator(text.begin(), text.end(), strict_pattern());
    auto end = std::sregex_iterator();
    size_t count = static_cast<size_t>(std::distance(begin, end));
    if (count == 0) {
        throw StrictParseError("reply does not contain the mandated verdict format");
    }
    if (count > 1) {
        throw StrictParseError("reply contains " + std::to_string(count) +
                               " verdict format occurrences, expected exactly one");
    }
    const std::smatch& m = *begin;
    auto s1 = Score::parse(m[1].str());
    auto s2 = Score::parse(m[2].str());
    if (!s1 || !s2) {
        throw StrictParseError("score out of range [1,10] at position " +
                               std::to_string(m.position(0)));
    }
    Winner winner = m[3].str() == "1" ? Winner::Side1 : Winner::Side2;
    return VerdictTriple{*s1, *s2, winner};
}

VerdictTriple parse_verdict_lenient(const std::string& text) {
    std::optional<Score> s1 = last_side_score(text, 1);
    std::optional<Score> s2 = last_side_score(text, 2);
    if (!s1 || !s2) {
        throw LenientParseError("scores are mandatory; missing an in-range score for side " +
                                std::string(!s1 ? "1" : "2"));
    }

    std::optional<Winner> winner;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), winner_pattern());
         it != std::sregex_iterator(); ++it) {
        std::string token = normalize_token((*it)[1].str());
        winner = winner_from_token(token);
    }
    if (!winner) throw LenientParseError("no winner declaration found");
    return VerdictTriple{*s1, *s2, *winner};
}

JudgeVerdict evaluate(const Transcript& transcript, const ModelId& judge_model,
                      const TemplateSet& templates, Gateway& gateway) {
    transcript.validate();

    CompletionRequest request;
    request.model = judge_model;
    request.system_prompt = render_judge_system(templates, transcript.spec.topic);
    std::vector<std::string> responses = transcript.responses();
    request.user_prompt = render_judge_prompt(templates, responses);

    CompletionResult result;
    try {
        result = gateway.complete(request);
    } catch (const GatewayError& e) {
        throw JudgeCallFailed(std::string("judge call failed: ") + e.what());
    }

    JudgeVerdict verdict{Score::from_tenths(10), Score::from_tenths(10), Winner::Draw,
                         ParseMode::Strict, judge_model, result.text};
    try {
        VerdictTriple triple = parse_verdict_strict(result.text);
        verdict.score1 = triple.score1;
        verdict.score2 = triple.score2;
        verdict.winner = triple.winner;
        verdict.parse_mode = ParseMode::Strict;
        return verdict;
    } catch (const StrictParseError&) {
        // fall through to recovery
    }
    try {
        VerdictTriple triple = parse_verdict_lenient(result.text);
        verdict.score1 = triple.score1;
        verdict.score2 = triple.score2;
        verdict.winner = triple.winner;
        verdict.parse_mode = ParseMode::Recovered;
        return verdict;
    } catch (const LenientParseError& e) {
        throw VerdictUnrecoverable(std::string("verdict unrecoverable: ") + e.what(),
                                   result.text);
    }
}

}  // namespace debatebench
