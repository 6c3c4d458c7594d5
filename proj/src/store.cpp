#include "debatebench/store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "debatebench/errors.hpp"

namespace debatebench {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

json model_to_json(const ModelId& m) {
    return json{{"name", m.name}, {"backend", m.backend_alias}};
}

ModelId model_from_json(const json& doc) {
    return ModelId{doc.at("name").get<std::string>(),
                   doc.at("backend").get<std::string>()};
}

json topic_to_json(const Topic& t) {
    return json{{"index", t.index},
                {"question", t.question},
                {"side1", t.side1_label},
                {"side2", t.side2_label}};
}

Topic topic_from_json(const json& doc) {
    Topic t;
    t.index = doc.at("index").get<int>();
    t.question = doc.at("question").get<std::string>();
    t.side1_label = doc.at("side1").get<std::string>();
    t.side2_label = doc.at("side2").get<std::string>();
    return t;
}

json turn_to_json(const Turn& t) {
    return json{{"index", t.index},
                {"speaker", t.speaker == SideRole::First ? "first" : "second"},
                {"model", model_to_json(t.model)},
                {"system_prompt", t.system_prompt},
                {"user_prompt", t.user_prompt},
                {"response", t.response},
                {"latency_ms", t.latency_ms},
                {"attempts", t.attempts}};
}

Turn turn_from_json(const json& doc) {
    Turn t;
    t.index = doc.at("index").get<int>();
    t.speaker = doc.at("speaker").get<std::string>() == "first" ? SideRole::First
                                                                : SideRole::Second;
    t.model = model_from_json(doc.at("model"));
    t.system_prompt = doc.at("system_prompt").get<std::string>();
    t.user_prompt = doc.at("user_prompt").get<std::string>();
    t.response = doc.at("response").get<std::string>();
    t.latency_ms = doc.at("latency_ms").get<std::int64_t>();
    t.attempts = doc.at("attempts").get<int>();
    return t;
}

json manifest_to_json(const RunManifest& m) {
    json roster = json::array();
    for (const ModelId& id : m.roster) roster.push_back(model_to_json(id));
    return json{{"kind", "manifest"},
                {"schema_version", m.schema_version},
                {"run_id", m.run_id},
                {"roster", roster},
                {"judge_model", model_to_json(m.judge_model)},
                {"rounds", m.rounds},
                {"self_play", m.self_play},
                {"topic_count", m.topic_count},
                {"topics_digest", m.topics_digest},
                {"templates_digest", m.templates_digest},
                {"gateway_digest", m.gateway_digest}};
}

RunManifest manifest_from_json(const json& doc) {
    RunManifest m;
    m.schema_version = doc.at("schema_version").get<int>();
    m.run_id = doc.at("run_id").get<std::string>();
    for (const json& r : doc.at("roster")) m.roster.push_back(model_from_json(r));
    m.judge_model = model_from_json(doc.at("judge_model"));
    m.rounds = doc.at("rounds").get<int>();
    m.self_play = doc.at("self_play").get<bool>();
    m.topic_count = doc.at("topic_count").get<int>();
    m.topics_digest = doc.at("topics_digest").get<std::string>();
    m.templates_digest = doc.at("templates_digest").get<std::string>();
    m.gateway_digest = doc.at("gateway_digest").get<std::string>();
    return m;
}

json debate_to_json(const StoredDebate& d) {
    json turns = json::array();
    for (const Turn& t : d.transcript.turns) turns.push_back(turn_to_json(t));
    return json{{"kind", "debate"},
                {"schema_version", kSchemaVersion},
                {"debate_id", d.debate_id},
                {"pair_index", d.pairing.pair_index},
                {"model_a", model_to_json(d.pairing.model_a)},
                {"model_b", model_to_json(d.pairing.model_b)},
                {"topic", topic_to_json(d.pairing.topic)},
                {"order", order_token(d.pairing.order)},
                {"rounds", d.transcript.spec.rounds},
                {"started_at", d.transcript.started_at},
                {"finished_at", d.transcript.finished_at},
                {"created_at", d.created_at},
                {"turns", turns}};
}

StoredDebate debate_from_json(const json& doc) {
    StoredDebate d;
    d.debate_id = doc.at("debate_id").get<std::string>();
    d.pairing.pair_index = doc.at("pair_index").get<int>();
    d.pairing.model_a = model_from_json(doc.at("model_a"));
    d.pairing.model_b = model_from_json(doc.at("model_b"));
    d.pairing.topic = topic_from_json(doc.at("topic"));
    d.pairing.order = order_from_token(doc.at("order").get<std::string>());
    d.created_at = doc.at("created_at").get<std::string>();

    d.transcript.spec.topic = d.pairing.topic;
    d.transcript.spec.rounds = doc.at("rounds").get<int>();
    d.transcript.spec.first_mover = d.pairing.first_mover();
    d.transcript.spec.second_mover = d.pairing.second_mover();
    d.transcript.started_at = doc.at("started_at").get<std::string>();
    d.transcript.finished_at = doc.at("finished_at").get<std::string>();
    for (const json& t : doc.at("turns")) d.transcript.turns.push_back(turn_from_json(t));
    return d;
}

json verdict_to_json(const StoredVerdict& v) {
    return json{{"kind", "verdict"},
                {"schema_version", kSchemaVersion},
                {"debate_id", v.debate_id},
                {"judge_model", model_to_json(v.verdict.judge_model)},
                {"score1_tenths", v.verdict.score1.tenths()},
                {"score2_tenths", v.verdict.score2.tenths()},
                {"winner", winner_token(v.verdict.winner)},
                {"parse_mode", parse_mode_token(v.verdict.parse_mode)},
                {"raw_reply", v.verdict.raw_reply},
                {"created_at", v.created_at}};
}

StoredVerdict verdict_from_json(const json& doc) {
    StoredVerdict v{
        doc.at("debate_id").get<std::string>(),
        JudgeVerdict{Score::from_tenths(doc.at("score1_tenths").get<int>()),
                     Score::from_tenths(doc.at("score2_tenths").get<int>()),
                     winner_from_token(doc.at("winner").get<std::string>()),
                     parse_mode_from_token(doc.at("parse_mode").get<std::string>()),
                     model_from_json(doc.at("judge_model")),
                     doc.at("raw_reply").get<std::string>()},
        doc.at("created_at").get<std::string>()};
    return v;
}

json failure_to_json(const StoredFailure& f) {
    return json{{"kind", "debate_failure"},
                {"schema_version", kSchemaVersion},
                {"debate_id", f.debate_id},
                {"turn_index", f.turn_index},
                {"error", f.error},
                {"created_at", f.created_at}};
}

StoredFailure failure_from_json(const json& doc) {
    return StoredFailure{doc.at("debate_id").get<std::string>(),
                         doc.at("turn_index").get<int>(),
                         doc.at("error").get<std::string>(),
                         doc.at("created_at").get<std::string>()};
}

json judge_failure_to_json(const StoredJudgeFailure& f) {
    return json{{"kind", "judge_failure"},
                {"schema_version", kSchemaVersion},
                {"debate_id", f.debate_id},
                {"judge_model", model_to_json(f.judge_model)},
                {"raw_reply", f.raw_reply},
                {"reason", f.reason},
                {"created_at", f.created_at}};
}

StoredJudgeFailure judge_failure_from_json(const json& doc) {
    return StoredJudgeFailure{doc.at("debate_id").get<std::string>(),
                              model_from_json(doc.at("judge_model")),
                              doc.at("raw_reply").get<std::string>(),
                              doc.at("reason").get<std::string>(),
                              doc.at("created_at").get<std::string>()};
}

}  // namespace

void RunManifest::verify_compatible(const RunManifest& current) const {
    auto mismatch = [](const std::string& field) {
        throw ManifestMismatch("configuration changed since the run began: " + field);
    };
    if (schema_version != current.schema_version) mismatch("schema_version");
    if (run_id != current.run_id) mismatch("run_id");
    if (roster.size() != current.roster.size()) mismatch("roster");
    for (size_t i = 0; i < roster.size(); ++i) {
        if (!(roster[i] == current.roster[i])) mismatch("roster");
    }
    if (!(judge_model == current.judge_model)) mismatch("judge_model");
    if (rounds != current.rounds) mismatch("rounds");
    if (self_play != current.self_play) mismatch("self_play");
    if (topic_count != current.topic_count) mismatch("topic_count");
    if (topics_digest != current.topics_digest) mismatch("topics_digest");
    if (templates_digest != current.templates_digest) mismatch("templates_digest");
    if (gateway_digest != current.gateway_digest) mismatch("gateway_digest");
}

RunStore::RunStore(RunStore&& other) noexcept { *this = std::move(other); }

RunStore& RunStore::operator=(RunStore&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        file_ = std::move(other.file_);
        fd_ = other.fd_;
        other.fd_ = -1;
        manifest_ = std::move(other.manifest_);
        debates_ = std::move(other.debates_);
        failures_ = std::move(other.failures_);
        verdicts_ = std::move(other.verdicts_);
        judge_failures_ = std::move(other.judge_failures_);
        verdict_index_ = std::move(other.verdict_index_);
    }
    return *this;
}

RunStore::~RunStore() {
    if (fd_ >= 0) ::close(fd_);
}

std::string make_debate_id(const std::string& run_id, const Pairing& pairing) {
    char topic_part[16];
    std::snprintf(topic_part, sizeof(topic_part), "t%02d", pairing.topic.index);
    return run_id + "/" + pairing.model_a.name + "__vs__" + pairing.model_b.name + "/" +
           topic_part + "/" + order_token(pairing.order);
}

RunStore RunStore::create(const std::filesystem::path& file, const RunManifest& manifest) {
    if (std::filesystem::exists(file)) {
        throw StorageFailure("store file already exists: " + file.string());
    }
    RunStore store;
    store.file_ = file;
    store.manifest_ = manifest;
    store.fd_ = ::open(file.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_EXCL, 0644);
    if (store.fd_ < 0) throw StorageFailure("cannot create store file: " + file.string());
    store.write_line(manifest_to_json(manifest).dump());
    return store;
}

RunStore RunStore::open(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw StorageFailure("cannot open store file: " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();

    RunStore store;
    store.file_ = file;

    // Split into lines; only the final line may be torn.
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos < content.size()) {
        size_t nl = content.find('\n', pos);
        if (nl == std::string::npos) {
            lines.push_back(content.substr(pos));
            break;
        }
        lines.push_back(content.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (lines.empty()) throw StorageFailure("store has no manifest: " + file.string());

    bool have_manifest = false;
    for (size_t i = 0; i < lines.size(); ++i) {
        bool last = i + 1 == lines.size();
        json doc = json::parse(lines[i], nullptr, false);
        if (doc.is_discarded()) {
            if (last) break;  // torn tail from an interrupted append
            throw StorageFailure("corrupt store record at line " + std::to_string(i + 1));
        }
        try {
            if (!have_manifest) {
                if (doc.value("kind", "") != "manifest") {
                    throw StorageFailure("first store record must be the manifest");
                }
                store.manifest_ = manifest_from_json(doc);
                have_manifest = true;
                continue;
            }
            store.index_record(doc, /*strict=*/!last);
        } catch (const StorageFailure&) {
            throw;
        } catch (const std::exception& e) {
            if (last) break;  // incomplete tail record
            throw StorageFailure("corrupt store record at line " + std::to_string(i + 1) +
                                 ": " + e.what());
        }
    }
    if (!have_manifest) throw StorageFailure("store has no manifest: " + file.string());

    store.fd_ = ::open(file.c_str(), O_WRONLY | O_APPEND);
    if (store.fd_ < 0) throw StorageFailure("cannot open store for append: " + file.string());
    return store;
}

void RunStore::index_record(const json& doc, bool strict) {
    (void)strict;
    std::string kind = doc.at("kind").get<std::string>();
    if (kind == "debate") {
        StoredDebate d = debate_from_json(doc);
        d.transcript.validate();
        if (!debates_.emplace(d.debate_id, d).second) {
            throw StorageFailure("duplicate debate record: " + d.debate_id);
        }
    } else if (kind == "verdict") {
        StoredVerdict v = verdict_from_json(doc);
        auto key = std::make_pair(v.debate_id, v.verdict.judge_model.name);
        if (verdict_index_.count(key)) {
            throw StorageFailure("duplicate verdict record: " + v.debate_id + " by " +
                                 v.verdict.judge_model.name);
        }
        verdict_index_[key] = verdicts_.size();
        verdicts_.push_back(std::move(v));
    } else if (kind == "debate_failure") {
        failures_.push_back(failure_from_json(doc));
    } else if (kind == "judge_failure") {
        judge_failures_.push_back(judge_failure_from_json(doc));
    } else if (kind == "manifest") {
        throw StorageFailure("unexpected second manifest record");
    } else {
        throw StorageFailure("unknown record kind: " + kind);
    }
}

void RunStore::write_line(const std::string& line) {
    std::string out = line;
    out += '\n';
    ssize_t n = ::write(fd_, out.data(), out.size());
    if (n != static_cast<ssize_t>(out.size())) {
        throw StorageFailure("short write to store file");
    }
    if (::fdatasync(fd_) != 0) {
        throw StorageFailure("fdatasync failed on store file");
    }
}

void RunStore::append(const StoredDebate& record) {
    if (debates_.count(record.debate_id)) {
        throw DuplicateId("debate already stored: " + record.debate_id);
    }
    record.transcript.validate();
    write_line(debate_to_json(record).dump());
    debates_.emplace(record.debate_id, record);
}

void RunStore::append(const StoredFailure& record) {
    write_line(failure_to_json(record).dump());
    failures_.push_back(record);
}

void RunStore::append(const StoredVerdict& record) {
    auto key = std::make_pair(record.debate_id, record.verdict.judge_model.name);
    if (verdict_index_.count(key)) {
        throw DuplicateId("verdict already stored: " + record.debate_id + " by " +
                          record.verdict.judge_model.name);
    }
    if (!debates_.count(record.debate_id)) {
        throw StorageFailure("verdict references unknown debate: " + record.debate_id);
    }
    write_line(verdict_to_json(record).dump());
    verdict_index_[key] = verdicts_.size();
    verdicts_.push_back(record);
}

void RunStore::append(const StoredJudgeFailure& record) {
    write_line(judge_failure_to_json(record).dump());
    judge_failures_.push_back(record);
}

const StoredDebate* RunStore::find_debate(const std::string& debate_id) const {
    auto it = debates_.find(debate_id);
    return it == debates_.end() ? nullptr : &it->second;
}

const StoredVerdict* RunStore::find_verdict(const std::string& debate_id,
                                            const std::string& judge_name) const {
    auto it = verdict_index_.find(std::make_pair(debate_id, judge_name));
    return it == verdict_index_.end() ? nullptr : &verdicts_[it->second];
}

bool RunStore::has_verdict(const std::string& debate_id,
                           const std::string& judge_name) const {
    return verdict_index_.count(std::make_pair(debate_id, judge_name)) > 0;
}

std::vector<std::string> RunStore::judge_names() const {
    std::vector<std::string> names;
    for (const StoredVerdict& v : verdicts_) {
        if (std::find(names.begin(), names.end(), v.verdict.judge_model.name) ==
            names.end()) {
            names.push_back(v.verdict.judge_model.name);
        }
    }
    return names;
}

std::vector<Pairing> resume_plan(const RunStore& store,
                                 const std::vector<Pairing>& schedule) {
    const std::string& judge = store.manifest().judge_model.name;
    std::vector<Pairing> plan;
    for (const Pairing& p : schedule) {
        std::string id = make_debate_id(store.manifest().run_id, p);
        if (!store.has_verdict(id, judge)) plan.push_back(p);
    }
    return plan;
}

}  // namespace debatebench
