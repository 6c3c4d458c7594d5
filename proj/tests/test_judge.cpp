#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "debatebench/debate.hpp"
#include "debatebench/errors.hpp"
#include "debatebench/judge.hpp"
#include "test_support.hpp"

using namespace debatebench;
using test_support::data_path;
using test_support::read_json;

TEST_CASE("score parsing accepts [1,10] with one decimal") {
    CHECK(Score::parse("1")->tenths() == 10);
    CHECK(Score::parse("10")->tenths() == 100);
    CHECK(Score::parse("8.5")->tenths() == 85);
    CHECK(Score::parse("10.0")->tenths() == 100);
    CHECK(Score::parse("7")->str() == "7");
    CHECK(Score::parse("7.5")->str() == "7.5");
    CHECK_FALSE(Score::parse("0"));
    CHECK_FALSE(Score::parse("0.9"));
    CHECK_FALSE(Score::parse("11"));
    CHECK_FALSE(Score::parse("10.1"));
    CHECK_FALSE(Score::parse("8.55"));
    CHECK_FALSE(Score::parse("-3"));
    CHECK_FALSE(Score::parse("8,5"));
    CHECK_FALSE(Score::parse(""));
}

TEST_CASE("strict parser accepts the mandated format") {
    auto t = parse_verdict_strict("side1: [[9]], side2: [[7]], winner: [[2]]");
    CHECK(t.score1.str() == "9");
    CHECK(t.score2.str() == "7");
    CHECK(t.winner == Winner::Side2);

    t = parse_verdict_strict("side1: [[8.5]], side2: [[7.5]], winner: [[1]]");
    CHECK(t.score1.tenths() == 85);
    CHECK(t.score2.tenths() == 75);
    CHECK(t.winner == Winner::Side1);

    // surrounding prose is ignored
    t = parse_verdict_strict(
        "Thank you both. side1: [[8]], side2: [[7]], winner: [[1]] -- a close one.");
    CHECK(t.score1.tenths() == 80);
    CHECK(t.winner == Winner::Side1);
}

TEST_CASE("strict parser rejections") {
    CHECK_THROWS_AS(parse_verdict_strict("side1: [[11]], side2: [[7]], winner: [[1]]"),
                    StrictParseError);
    CHECK_THROWS_AS(parse_verdict_strict("side1: [[8]], side2: [[8]], winner: [[tie]]"),
                    StrictParseError);
    CHECK_THROWS_AS(parse_verdict_strict("side 1: [[8]], side 2: [[7]], winner: [[1]]"),
                    StrictParseError);
    CHECK_THROWS_AS(parse_verdict_strict("no verdict here"), StrictParseError);
    // several occurrences: strict refuses, recovery takes the last
    std::string twice =
        "side1: [[7]], side2: [[9]], winner: [[2]]. "
        "side1: [[8]], side2: [[9]], winner: [[2]]";
    CHECK_THROWS_AS(parse_verdict_strict(twice), StrictParseError);
    auto t = parse_verdict_lenient(twice);
    CHECK(t.score1.tenths() == 80);
}

TEST_CASE("replies that echo the format instruction still parse") {
    // the non-numeric instruction text is not a format occurrence
    std::string echo =
        "My answer follows the format \"side1: [[score of side 1]], side2: "
        "[[score of side 2]], winner: [[name of winner]]\". "
        "side1: [[8]], side2: [[7]], winner: [[2]]";
    VerdictTriple t = parse_verdict_strict(echo);
    CHECK(t.score1.tenths() == 80);
    CHECK(t.score2.tenths() == 70);
    CHECK(t.winner == Winner::Side2);

    // echo plus a deviating final answer goes through recovery
    std::string echo_deviating =
        "Per the format \"side1: [[score of side 1]], side2: [[score of side 2]], "
        "winner: [[name of winner]]\": side 1: 8, side 2: 7, winner: 2";
    CHECK_THROWS_AS(parse_verdict_strict(echo_deviating), StrictParseError);
    VerdictTriple r = parse_verdict_lenient(echo_deviating);
    CHECK(r.score1.tenths() == 80);
    CHECK(r.score2.tenths() == 70);
    CHECK(r.winner == Winner::Side2);
}

TEST_CASE("format/parse round-trip over the half-point grid") {
    for (int s1 = 10; s1 <= 100; s1 += 5) {
        for (int s2 = 10; s2 <= 100; s2 += 5) {
            for (Winner w : {Winner::Side1, Winner::Side2}) {
                VerdictTriple in{Score::from_tenths(s1), Score::from_tenths(s2), w};
                VerdictTriple out = parse_verdict_strict(format_verdict(in));
                CHECK(out.score1 == in.score1);
                CHECK(out.score2 == in.score2);
                CHECK(out.winner == in.winner);
            }
        }
    }
    CHECK_THROWS_AS(
        format_verdict(VerdictTriple{*Score::parse("8"), *Score::parse("8"), Winner::Draw}),
        ConfigError);
}

TEST_CASE("every strict-parsable string parses leniently to the same triple") {
    for (int s1 = 10; s1 <= 100; s1 += 5) {
        for (int s2 = 10; s2 <= 100; s2 += 5) {
            for (Winner w : {Winner::Side1, Winner::Side2}) {
                std::string text =
                    format_verdict(VerdictTriple{Score::from_tenths(s1),
                                                 Score::from_tenths(s2), w});
                VerdictTriple strict = parse_verdict_strict(text);
                VerdictTriple lenient = parse_verdict_lenient(text);
                CHECK(strict.score1 == lenient.score1);
                CHECK(strict.score2 == lenient.score2);
                CHECK(strict.winner == lenient.winner);
            }
        }
    }
}

TEST_CASE("strict verdicts embedded in prose parse identically via both paths") {
    // words free of digits and of side/winner/tie/draw tokens, so the
    // padding cannot introduce candidates of its own
    static const char* words[] = {"thank", "you", "both", "for", "a",  "spirited",
                                  "exchange", "of", "views", "overall", "quality",
                                  "was", "high", "and", "the", "rebuttals", "landed"};
    std::mt19937 rng(20240614);
    auto prose = [&](int max_words) {
        std::string out;
        int n = static_cast<int>(rng() % (max_words + 1));
        for (int i = 0; i < n; ++i) {
            out += words[rng() % (sizeof(words) / sizeof(words[0]))];
            out += ' ';
        }
        return out;
    };
    for (int trial = 0; trial < 300; ++trial) {
        VerdictTriple in{Score::from_tenths(10 + 5 * static_cast<int>(rng() % 19)),
                         Score::from_tenths(10 + 5 * static_cast<int>(rng() % 19)),
                         rng() % 2 == 0 ? Winner::Side1 : Winner::Side2};
        std::string text = prose(6) + format_verdict(in) + ". " + prose(6);
        CAPTURE(text);
        VerdictTriple strict = parse_verdict_strict(text);
        VerdictTriple lenient = parse_verdict_lenient(text);
        CHECK(strict.score1 == in.score1);
        CHECK(strict.score2 == in.score2);
        CHECK(strict.winner == in.winner);
        CHECK(lenient.score1 == strict.score1);
        CHECK(lenient.score2 == strict.score2);
        CHECK(lenient.winner == strict.winner);
    }
}

TEST_CASE("checked-in deviation corpus parses via the lenient path") {
    auto corpus = read_json(data_path("lenient_corpus.json"));
    REQUIRE(corpus.size() >= 12);
    for (const auto& entry : corpus) {
        std::string text = entry.at("text").get<std::string>();
        CAPTURE(text);
        CHECK_THROWS_AS(parse_verdict_strict(text), StrictParseError);
        VerdictTriple t = parse_verdict_lenient(text);
        CHECK(t.score1 == *Score::parse(entry.at("score1").get<std::string>()));
        CHECK(t.score2 == *Score::parse(entry.at("score2").get<std::string>()));
        CHECK(t.winner == winner_from_token(entry.at("winner").get<std::string>()));
    }
}

TEST_CASE("garbage strings fail both parsers") {
    auto corpus = read_json(data_path("unrecoverable_corpus.json"));
    for (const auto& entry : corpus) {
        std::string text = entry.get<std::string>();
        CAPTURE(text);
        CHECK_THROWS_AS(parse_verdict_strict(text), StrictParseError);
        CHECK_THROWS_AS(parse_verdict_lenient(text), LenientParseError);
    }
}

TEST_CASE("consistency flag is derived metadata only") {
    JudgeVerdict v{*Score::parse("8"), *Score::parse("7"), Winner::Side1,
                   ParseMode::Strict, ModelId{"j", "j"}, ""};
    CHECK(v.consistency_flag());
    v.winner = Winner::Side2;
    CHECK_FALSE(v.consistency_flag());
    // equal scores with a declared winner: allowed, flagged inconsistent
    v.score2 = *Score::parse("8");
    v.winner = Winner::Side1;
    CHECK_FALSE(v.consistency_flag());
    v.winner = Winner::Draw;
    CHECK(v.consistency_flag());
}

namespace {

Transcript scripted_transcript(Gateway& gateway, const std::string& judge_reply) {
    // four deterministic turns plus a judge reply wired by fingerprint
    DebateSpec spec;
    spec.topic = default_topics()[0];
    spec.first_mover = ModelId{"m1", "mock"};
    spec.second_mover = ModelId{"m2", "mock"};
    spec.rounds = 4;

    const TemplateSet& set = TemplateSet::defaults();
    std::vector<std::string> history;
    for (int k = 1; k <= 4; ++k) {
        SideRole speaker = k % 2 == 1 ? SideRole::First : SideRole::Second;
        CompletionRequest req;
        req.model = speaker == SideRole::First ? spec.first_mover : spec.second_mover;
        req.system_prompt = render_debater_system(set, spec.topic, speaker,
                                                  stage_for_turn(k));
        req.user_prompt = render_debater_prompt(set, history, speaker);
        std::string response = "turn-" + std::to_string(k);
        gateway.scripted("mock").register_response(req.fingerprint(), response);
        history.push_back(response);
    }

    FixedClock clock(std::chrono::system_clock::time_point{});
    Transcript transcript = run_debate(spec, set, gateway, clock);

    CompletionRequest judge_req;
    judge_req.model = ModelId{"judge", "mock"};
    judge_req.system_prompt = render_judge_system(set, spec.topic);
    judge_req.user_prompt = render_judge_prompt(set, history);
    gateway.scripted("mock").register_response(judge_req.fingerprint(), judge_reply);
    return transcript;
}

Gateway scripted_gateway() {
    nlohmann::json doc = {{"backends", {{"mock", {{"type", "scripted"}, {"mode", "exact"}}}}}};
    return Gateway(GatewayConfig::from_json(doc));
}

}  // namespace

TEST_CASE("evaluate records the parse mode and preserves the raw reply") {
    SUBCASE("strict reply") {
        Gateway gateway = scripted_gateway();
        Transcript t =
            scripted_transcript(gateway, "side1: [[8]], side2: [[7]], winner: [[1]]");
        JudgeVerdict v = evaluate(t, ModelId{"judge", "mock"}, TemplateSet::defaults(),
                                  gateway);
        CHECK(v.parse_mode == ParseMode::Strict);
        CHECK(v.score1.tenths() == 80);
        CHECK(v.score2.tenths() == 70);
        CHECK(v.winner == Winner::Side1);
        CHECK(v.raw_reply == "side1: [[8]], side2: [[7]], winner: [[1]]");
    }
    SUBCASE("tie reply recovers as a draw") {
        Gateway gateway = scripted_gateway();
        Transcript t =
            scripted_transcript(gateway, "side1: [[8]], side2: [[8]], winner: [[tie]]");
        JudgeVerdict v = evaluate(t, ModelId{"judge", "mock"}, TemplateSet::defaults(),
                                  gateway);
        CHECK(v.parse_mode == ParseMode::Recovered);
        CHECK(v.winner == Winner::Draw);
    }
    SUBCASE("prose reply is unrecoverable") {
        Gateway gateway = scripted_gateway();
        Transcript t = scripted_transcript(gateway, "I think both did well.");
        CHECK_THROWS_AS(evaluate(t, ModelId{"judge", "mock"}, TemplateSet::defaults(),
                                 gateway),
                        VerdictUnrecoverable);
        try {
            evaluate(t, ModelId{"judge", "mock"}, TemplateSet::defaults(), gateway);
        } catch (const VerdictUnrecoverable& e) {
            CHECK(e.raw_reply() == "I think both did well.");
        }
    }
    SUBCASE("missing judge script is a call failure") {
        Gateway gateway = scripted_gateway();
        Transcript t =
            scripted_transcript(gateway, "side1: [[8]], side2: [[7]], winner: [[1]]");
        CHECK_THROWS_AS(evaluate(t, ModelId{"other-judge", "mock"},
                                 TemplateSet::defaults(), gateway),
                        JudgeCallFailed);
    }
}
