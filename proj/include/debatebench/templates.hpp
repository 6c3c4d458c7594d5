#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "debatebench/topics.hpp"

namespace debatebench {

enum class Stage { Opening, FirstResponse, Continuation };

/// The debate and judge prompt templates. Placeholders are written
/// `{TOPIC}`, `{SIDE}` and `{RESPONSE_<k>}`. The history and judge
/// templates are fragment lists, one fragment per line; fragment k is
/// applied to the k-th prior response. History lists longer than the
/// fragment list reuse the last two fragments in alternation.
struct TemplateSet {
    std::string opening_system;
    std::string responder_system;
    std::string continuation_system;
    std::string judge_system;
    std::string debater_opening_prompt;
    /// Round-2 prompt for the second mover (single prior response).
    std::string responder_opening_prompt;
    std::string history_prompt_first_person;
    std::string history_prompt_second_person;
    /// First line is a fixed header, following lines alternate per turn.
    std::string judge_prompt;

    /// The bundled default set.
    static const TemplateSet& defaults();

    /// Loads a set from a directory of UTF-8 text files, one file per
    /// template (opening_system.txt, responder_system.txt, ...). A single
    /// trailing newline per file is stripped.
    static TemplateSet load_dir(const std::filesystem::path& dir);

    /// File names used by load_dir, in field order.
    static const std::vector<std::string>& file_names();

    /// Structural validation (placeholders present, fragment lists well
    /// formed). Throws TemplateError.
    void validate() const;

    std::string digest() const;
};

/// Replaces each `{NAME}` placeholder with its value. Unknown placeholder
/// names raise TemplateError; values are inserted verbatim and never
/// rescanned.
std::string substitute_placeholders(const std::string& tmpl,
                                    const std::map<std::string, std::string>& values);

/// System prompt for a debater. Opening is only valid for the first
/// mover and FirstResponse only for the second; other pairings raise
/// IncompatibleStage.
std::string render_debater_system(const TemplateSet& set, const Topic& topic,
                                  SideRole side, Stage stage);

/// User prompt for a debater given the prior responses in chronological
/// order. Raises PerspectiveMismatch when the history length is
/// inconsistent with whose turn it is (the first mover speaks after an
/// even number of turns, the second after an odd number).
std::string render_debater_prompt(const TemplateSet& set,
                                  std::span<const std::string> history,
                                  SideRole perspective);

std::string render_judge_system(const TemplateSet& set, const Topic& topic);

/// Judge user prompt over a complete script (non-empty, even length,
/// every response non-empty). Raises IncompleteTranscript otherwise.
std::string render_judge_prompt(const TemplateSet& set,
                                std::span<const std::string> responses);

}  // namespace debatebench
