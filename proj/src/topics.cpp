#include "debatebench/topics.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "debatebench/errors.hpp"
#include "debatebench/util.hpp"

namespace debatebench {

void Topic::validate() const {
    if (index < 1) throw ConfigError("topic index must be >= 1");
    if (trim(question).empty()) throw ConfigError("topic question is empty");
    if (trim(side1_label).empty() || trim(side2_label).empty()) {
        throw ConfigError("topic side labels must be non-empty");
    }
    if (side1_label == side2_label) {
        throw ConfigError("topic side labels must differ: \"" + side1_label + "\"");
    }
}

std::vector<Topic> parse_topics(const std::string& text) {
    std::vector<Topic> topics;
    for (const std::string& raw : split_lines(text)) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        Topic t;
        t.index = static_cast<int>(topics.size()) + 1;
        size_t p1 = line.find('|');
        if (p1 == std::string::npos) {
            t.question = line;
        } else {
            size_t p2 = line.find('|', p1 + 1);
            if (p2 == std::string::npos) {
                throw ConfigError("topic line has one '|' separator, expected two: " + line);
            }
            t.question = trim(line.substr(0, p1));
            t.side1_label = trim(line.substr(p1 + 1, p2 - p1 - 1));
            t.side2_label = trim(line.substr(p2 + 1));
        }
        t.validate();
        topics.push_back(std::move(t));
    }
    if (topics.empty()) throw EmptyTopics("topic list is empty");
    return topics;
}

std::vector<Topic> load_topics(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open topic file: " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_topics(buf.str());
}

const std::vector<Topic>& default_topics() {
    static const std::vector<Topic> topics = parse_topics(
        "Can alternative energy effectively replace fossil fuels?\n"
        "Should K-12 students dissect animals in science classrooms?\n"
        "Is artificial intelligence good for society?\n"
        "Should bottled water be banned?\n"
        "Is a college education worth it?\n"
        "Should the United States keep daylight saving time?\n"
        "Should school dress codes be implemented and enforced?\n"
        "Should the drinking age be lowered from 21 to a younger age?\n"
        "Should the election day be made a national holiday?\n"
        "Should the governments use Large Language Models for advice?\n"
        "Should employers be able to mandate vaccinations?\n"
        "Should fighting be allowed in hockey?\n"
        "Should fur clothing be banned?\n"
        "Should genetically modified organisms (GMOs) be grown?\n"
        "Is golf a sport and are golfers athletes?\n"
        "Is homework beneficial?\n"
        "Is the internet “making us stupid?”\n"
        "Should medical aid in dying be legal?\n"
        "Is obesity a disease?\n"
        "Should the penny stay in circulation?\n"
        "Are the Olympic games an overall benefit for their host countries and cities?\n"
        "Is there really a Santa Claus?\n"
        "Should Halloween be moved permanently to Saturday?\n"
        "Should students have to wear school uniforms?\n"
        "Is social media good for society?\n");
    return topics;
}

std::string topics_digest(const std::vector<Topic>& topics) {
    std::string blob;
    for (const Topic& t : topics) {
        blob += std::to_string(t.index);
        blob += '\x1f';
        blob += t.question;
        blob += '\x1f';
        blob += t.side1_label;
        blob += '\x1f';
        blob += t.side2_label;
        blob += '\n';
    }
    return fnv1a64_hex(blob);
}

}  // namespace debatebench
