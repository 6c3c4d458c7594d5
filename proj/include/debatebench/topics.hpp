#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace debatebench {

enum class SideRole { First, Second };

/// A debatable yes/no question with two labeled sides. Side 1 argues
/// `side1_label`, side 2 argues `side2_label`.
struct Topic {
    int index = 0;  // 1-based position in the topic list
    std::string question;
    std::string side1_label = "Pro";
    std::string side2_label = "Con";

    const std::string& side_label(SideRole side) const {
        return side == SideRole::First ? side1_label : side2_label;
    }

    /// Throws ConfigError when an invariant is violated (empty question,
    /// identical side labels, non-positive index).
    void validate() const;
};

/// Parses a topic file: UTF-8, one topic per line. A plain line is a
/// question with default Pro/Con sides; `question | side1 | side2`
/// overrides the labels. Blank lines are skipped. Indices are assigned
/// by position, starting at 1.
std::vector<Topic> parse_topics(const std::string& text);
std::vector<Topic> load_topics(const std::filesystem::path& file);

/// The bundled default topic list (25 questions).
const std::vector<Topic>& default_topics();

/// Digest over index/question/labels, used to pin a run to its inputs.
std::string topics_digest(const std::vector<Topic>& topics);

}  // namespace debatebench
