#pragma once

#include <optional>
#include <string>

#include "debatebench/debate.hpp"
#include "debatebench/gateway.hpp"
#include "debatebench/templates.hpp"

namespace debatebench {

enum class Winner { Side1, Side2, Draw };

std::string winner_token(Winner w);
Winner winner_from_token(const std::string& token);

/// A judge score in [1,10], held in tenths so aggregation never compares
/// floating point. Only whole and half points occur in practice, but any
/// single decimal is accepted.
class Score {
public:
    static Score from_tenths(int tenths);
    /// Parses "8" or "8.5"; rejects more than one decimal place and
    /// values outside [1,10].
    static std::optional<Score> parse(const std::string& text);

    int tenths() const { return tenths_; }
    double value() const { return tenths_ / 10.0; }
    /// Canonical text: no decimal point for whole values ("8", "8.5").
    std::string str() const;

    bool operator==(const Score&) const = default;
    auto operator<=>(const Score&) const = default;

private:
    explicit Score(int tenths) : tenths_(tenths) {}
    int tenths_;
};

enum class ParseMode { Strict, Recovered, Manual };

std::string parse_mode_token(ParseMode m);
ParseMode parse_mode_from_token(const std::string& token);

struct VerdictTriple {
    Score score1;
    Score score2;
    Winner winner;
};

struct JudgeVerdict {
    Score score1;
    Score score2;
    Winner winner;
    ParseMode parse_mode;
    ModelId judge_model;
    std::string raw_reply;  // preserved verbatim for audit

    /// Derived metadata only: whether the declared winner matches the
    /// score argmax (Draw for equal scores). Judges do declare winners
    /// at equal scores, so this is never enforced.
    bool consistency_flag() const;
};

/// The canonical reply format. Only Side1/Side2 are representable, per
/// the mandated output format.
std::string format_verdict(const VerdictTriple& triple);

/// Accepts exactly one occurrence of the canonical format with in-range
/// scores and winner "1" or "2". Surrounding prose is ignored. Throws
/// StrictParseError.
VerdictTriple parse_verdict_strict(const std::string& text);

/// Recovery path for replies that deviate from the template: whitespace
/// and casing variation, missing brackets, "side 1" spellings, winner
/// tokens 1/2/side1/side2/tie/draw. When several candidates appear, the
/// last one wins. Throws LenientParseError.
VerdictTriple parse_verdict_lenient(const std::string& text);

/// Calls the judge model on a complete transcript and parses its reply,
/// strict first, then lenient. Throws JudgeCallFailed on gateway errors
/// and VerdictUnrecoverable (carrying the raw reply) when neither parser
/// succeeds.
JudgeVerdict evaluate(const Transcript& transcript, const ModelId& judge_model,
                      const TemplateSet& templates, Gateway& gateway);

}  // namespace debatebench
