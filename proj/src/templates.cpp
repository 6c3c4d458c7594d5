#include "debatebench/templates.hpp"

#include <fstream>
#include <sstream>

#include "debatebench/errors.hpp"
#include "debatebench/util.hpp"

namespace debatebench {

namespace {

bool is_placeholder_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Splits a fragment-list template into its lines, dropping empty ones.
std::vector<std::string> fragments_of(const std::string& tmpl) {
    std::vector<std::string> out;
    for (std::string& line : split_lines(tmpl)) {
        if (!line.empty()) out.push_back(std::move(line));
    }
    return out;
}

bool has_response_placeholder(const std::string& fragment) {
    size_t at = fragment.find("{RESPONSE_");
    if (at == std::string::npos) return false;
    return fragment.find('}', at) != std::string::npos;
}

// Replaces the single {RESPONSE_*} placeholder of a fragment with the
// given response, verbatim.
std::string apply_fragment(const std::string& fragment, const std::string& response) {
    size_t at = fragment.find("{RESPONSE_");
    if (at == std::string::npos) {
        throw TemplateError("fragment lacks a {RESPONSE_*} placeholder: " + fragment);
    }
    size_t close = fragment.find('}', at);
    if (close == std::string::npos) {
        throw TemplateError("unterminated placeholder in fragment: " + fragment);
    }
    std::string out = fragment.substr(0, at);
    out += response;
    out += fragment.substr(close + 1);
    return out;
}

// Selects the fragment for position k (1-based) out of m fragments.
// Beyond the list, the last two fragments alternate so the speaker
// attribution keeps flipping.
const std::string& fragment_for(const std::vector<std::string>& fragments, size_t k) {
    size_t m = fragments.size();
    if (k <= m) return fragments[k - 1];
    if (m < 2) {
        throw TemplateError("history template needs at least two fragments to extend");
    }
    // k > m: parity relative to the last listed fragment decides.
    return (k % 2 == m % 2) ? fragments[m - 1] : fragments[m - 2];
}

std::string join_with_space(const std::vector<std::string>& parts) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += ' ';
        out += parts[i];
    }
    return out;
}

std::string serialize_history(const std::string& tmpl,
                              std::span<const std::string> history) {
    std::vector<std::string> fragments = fragments_of(tmpl);
    if (fragments.empty()) throw TemplateError("history template is empty");
    std::vector<std::string> parts;
    parts.reserve(history.size());
    for (size_t k = 1; k <= history.size(); ++k) {
        parts.push_back(apply_fragment(fragment_for(fragments, k), history[k - 1]));
    }
    return join_with_space(parts);
}

std::string read_template_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open template file: " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    // one trailing newline belongs to the file, not the template
    if (!text.empty() && text.back() == '\n') text.pop_back();
    if (!text.empty() && text.back() == '\r') text.pop_back();
    return text;
}

}  // namespace

std::string substitute_placeholders(const std::string& tmpl,
                                    const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    size_t pos = 0;
    while (pos < tmpl.size()) {
        char c = tmpl[pos];
        if (c != '{') {
            out += c;
            ++pos;
            continue;
        }
        size_t name_end = pos + 1;
        while (name_end < tmpl.size() && is_placeholder_char(tmpl[name_end])) ++name_end;
        if (name_end == pos + 1 || name_end >= tmpl.size() || tmpl[name_end] != '}') {
            // not a placeholder token; emit the brace as-is
            out += c;
            ++pos;
            continue;
        }
        std::string name = tmpl.substr(pos + 1, name_end - pos - 1);
        auto it = values.find(name);
        if (it == values.end()) {
            throw TemplateError("template references unsupplied placeholder {" + name + "}");
        }
        out += it->second;
        pos = name_end + 1;
    }
    return out;
}

const TemplateSet& TemplateSet::defaults() {
    static const TemplateSet set = [] {
        TemplateSet s;
        s.opening_system =
            "We are having a debate and the topic is \"{TOPIC}\". You are representing "
            "\"{SIDE}\" and you should zealously support it. This the first round and you "
            "are going first. You must bring-up arguments supporting your side backed by "
            "logic, facts and evidence. Your answer should also be convincing, factual "
            "and concise.";
        s.responder_system =
            "We are having a debate and the topic is \"{TOPIC}\". You are representing "
            "\"{SIDE}\" and you should zealously support it. The other side has started "
            "the debate and you will be given their arguments. You must first provide a "
            "rebuttal to the points raised by them, and then provide new arguments "
            "supporting your side. All your arguments should be backed by logic, facts "
            "and evidence. Your answer should also be convincing, factual and concise.";
        s.continuation_system =
            "We are having a debate and the topic is \"{TOPIC}\". You are representing "
            "\"{SIDE}\" and you should zealously support it. You will be given all the "
            "arguments so far. In your response, you should support your side and refute "
            "the points raised by the other side. Your arguments should be backed by "
            "logic, facts and evidence. Your answer should also be convincing, factual "
            "and concise.";
        s.judge_system =
            "We had a debate and the topic was \"{TOPIC}\". The two sides in the debate "
            "each provided arguments to prove their side and refute the points raised by "
            "the opponent. You are a judge for this debate. You should be impartial and "
            "as objective as possible. The debate script will be given. You should give "
            "a score from 1 to 10 to each side of the debate. In your judgement, you "
            "should take into account the following criteria: clarity of arguments, "
            "factuality and use of evidence, rebuttal and counterarguments, logical "
            "consistency, persuasiveness and impact, conciseness, coherence. Also, you "
            "should choose the side who you think is the overall winner. Your answer "
            "MUST follow the following format: \"side1: [[score of side 1]], side2: "
            "[[score of side 2]], winner: [[name of winner]]\" where score of side 1 and "
            "score of side 2 are numbers from 1 to 10 and name of winner is either \"1\" "
            "or \"2\".";
        s.debater_opening_prompt = "Please start the debate.";
        s.responder_opening_prompt = "The other side said: \"{RESPONSE_1}\".";
        // Keeps the source text's "You the other side responded" wording.
        s.history_prompt_first_person =
            "You initially said: \"{RESPONSE_1}\".\n"
            "You the other side responded: \"{RESPONSE_2}\".\n"
            "Then you said: \"{RESPONSE_3}\".\n"
            "The other side said: \"{RESPONSE_4}\".";
        s.history_prompt_second_person =
            "The other side initially said: \"{RESPONSE_1}\".\n"
            "You then responded: \"{RESPONSE_2}\".\n"
            "The other side said: \"{RESPONSE_3}\".\n"
            "Then you said: \"{RESPONSE_4}\".";
        s.judge_prompt =
            "The script of the debate is as follows:\n"
            "Side 1: \"{RESPONSE_k}\".\n"
            "Side 2: \"{RESPONSE_k}\".";
        s.validate();
        return s;
    }();
    return set;
}

const std::vector<std::string>& TemplateSet::file_names() {
    static const std::vector<std::string> names = {
        "opening_system.txt",
        "responder_system.txt",
        "continuation_system.txt",
        "judge_system.txt",
        "debater_opening_prompt.txt",
        "responder_opening_prompt.txt",
        "history_first_person.txt",
        "history_second_person.txt",
        "judge_prompt.txt",
    };
    return names;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
    TemplateSet s;
    std::string* fields[] = {
        &s.opening_system,         &s.responder_system,
        &s.continuation_system,    &s.judge_system,
        &s.debater_opening_prompt, &s.responder_opening_prompt,
        &s.history_prompt_first_person, &s.history_prompt_second_person,
        &s.judge_prompt,
    };
    const auto& names = file_names();
    for (size_t i = 0; i < names.size(); ++i) {
        *fields[i] = read_template_file(dir / names[i]);
    }
    s.validate();
    return s;
}

void TemplateSet::validate() const {
    auto require = [](bool cond, const char* what) {
        if (!cond) throw TemplateError(what);
    };
    require(opening_system.find("{TOPIC}") != std::string::npos &&
                opening_system.find("{SIDE}") != std::string::npos,
            "opening_system must reference {TOPIC} and {SIDE}");
    require(responder_system.find("{TOPIC}") != std::string::npos &&
                responder_system.find("{SIDE}") != std::string::npos,
            "responder_system must reference {TOPIC} and {SIDE}");
    require(continuation_system.find("{TOPIC}") != std::string::npos &&
                continuation_system.find("{SIDE}") != std::string::npos,
            "continuation_system must reference {TOPIC} and {SIDE}");
    require(judge_system.find("{TOPIC}") != std::string::npos,
            "judge_system must reference {TOPIC}");
    require(!debater_opening_prompt.empty(), "debater_opening_prompt is empty");
    require(has_response_placeholder(responder_opening_prompt),
            "responder_opening_prompt must reference {RESPONSE_1}");
    for (const std::string* hist :
         {&history_prompt_first_person, &history_prompt_second_person}) {
        std::vector<std::string> frags = fragments_of(*hist);
        require(!frags.empty(), "history template is empty");
        for (const std::string& f : frags) {
            require(has_response_placeholder(f),
                    "history fragment lacks a {RESPONSE_*} placeholder");
        }
    }
    std::vector<std::string> judge_lines = fragments_of(judge_prompt);
    require(judge_lines.size() >= 3, "judge_prompt needs a header and two fragments");
    for (size_t i = 1; i < judge_lines.size(); ++i) {
        require(has_response_placeholder(judge_lines[i]),
                "judge_prompt fragment lacks a {RESPONSE_*} placeholder");
    }
}

std::string TemplateSet::digest() const {
    std::string blob;
    for (const std::string* t :
         {&opening_system, &responder_system, &continuation_system, &judge_system,
          &debater_opening_prompt, &responder_opening_prompt,
          &history_prompt_first_person, &history_prompt_second_person, &judge_prompt}) {
        blob += *t;
        blob += '\x1e';
    }
    return fnv1a64_hex(blob);
}

std::string render_debater_system(const TemplateSet& set, const Topic& topic,
                                  SideRole side, Stage stage) {
    if (stage == Stage::Opening && side != SideRole::First) {
        throw IncompatibleStage("only the first mover opens the debate");
    }
    if (stage == Stage::FirstResponse && side != SideRole::Second) {
        throw IncompatibleStage("only the second mover gives the first response");
    }
    const std::string& tmpl = stage == Stage::Opening        ? set.opening_system
                              : stage == Stage::FirstResponse ? set.responder_system
                                                              : set.continuation_system;
    return substitute_placeholders(
        tmpl, {{"TOPIC", topic.question}, {"SIDE", topic.side_label(side)}});
}

std::string render_debater_prompt(const TemplateSet& set,
                                  std::span<const std::string> history,
                                  SideRole perspective) {
    // First speaks on turns 1,3,5,... (even history), Second on 2,4,... (odd).
    bool even = history.size() % 2 == 0;
    if (perspective == SideRole::First && !even) {
        throw PerspectiveMismatch("first mover cannot speak after an odd number of turns");
    }
    if (perspective == SideRole::Second && even) {
        throw PerspectiveMismatch("second mover cannot speak after an even number of turns");
    }
    if (perspective == SideRole::First && history.empty()) {
        return set.debater_opening_prompt;
    }
    if (perspective == SideRole::Second && history.size() == 1) {
        return apply_fragment(set.responder_opening_prompt, history[0]);
    }
    const std::string& tmpl = perspective == SideRole::First
                                  ? set.history_prompt_first_person
                                  : set.history_prompt_second_person;
    return serialize_history(tmpl, history);
}

std::string render_judge_system(const TemplateSet& set, const Topic& topic) {
    return substitute_placeholders(set.judge_system, {{"TOPIC", topic.question}});
}

std::string render_judge_prompt(const TemplateSet& set,
                                std::span<const std::string> responses) {
    if (responses.empty() || responses.size() % 2 != 0) {
        throw IncompleteTranscript("judge prompt requires a complete script");
    }
    for (const std::string& r : responses) {
        if (r.empty()) throw IncompleteTranscript("script contains an empty response");
    }
    std::vector<std::string> lines = fragments_of(set.judge_prompt);
    std::vector<std::string> parts;
    parts.push_back(lines[0]);
    for (size_t k = 1; k <= responses.size(); ++k) {
        // fragment lines after the header alternate by turn parity
        size_t m = lines.size() - 1;
        size_t idx = (k <= m) ? k : ((k % 2 == m % 2) ? m : m - 1);
        parts.push_back(apply_fragment(lines[idx], responses[k - 1]));
    }
    return join_with_space(parts);
}

}  // namespace debatebench
