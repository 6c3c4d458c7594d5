#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "debatebench/debate.hpp"
#include "debatebench/judge.hpp"
#include "debatebench/tournament.hpp"

namespace debatebench {

/// Pins a run to its inputs so a resumed run rejects changed
/// configurations.
struct RunManifest {
    int schema_version = 1;
    std::string run_id;
    std::vector<ModelId> roster;
    ModelId judge_model;
    int rounds = 4;
    bool self_play = false;
    int topic_count = 0;
    std::string topics_digest;
    std::string templates_digest;
    std::string gateway_digest;

    /// Throws ManifestMismatch when `current` differs in any field that
    /// changes the schedule or the prompts.
    void verify_compatible(const RunManifest& current) const;
};

/// Deterministic debate key: run, pair, topic index, seat order.
std::string make_debate_id(const std::string& run_id, const Pairing& pairing);

struct StoredDebate {
    std::string debate_id;
    Pairing pairing;
    Transcript transcript;
    std::string created_at;
};

struct StoredFailure {
    std::string debate_id;
    int turn_index = 0;
    std::string error;
    std::string created_at;
};

struct StoredVerdict {
    std::string debate_id;
    JudgeVerdict verdict;
    std::string created_at;
};

/// A debate the judge replied to in a form neither parser accepts; kept
/// with the raw reply so a manual verdict can be entered later.
struct StoredJudgeFailure {
    std::string debate_id;
    ModelId judge_model;
    std::string raw_reply;
    std::string reason;
    std::string created_at;
};

/// Append-only JSON Lines store for debates, verdicts and run metadata.
/// One self-describing record per line; each append is a single atomic
/// write. A torn final line (interrupted append) is ignored on load;
/// corruption anywhere else raises StorageFailure. Single writer, any
/// number of readers.
class RunStore {
public:
    RunStore(RunStore&& other) noexcept;
    RunStore& operator=(RunStore&& other) noexcept;
    ~RunStore();

    /// Creates a new store file (must not exist) and writes the manifest.
    static RunStore create(const std::filesystem::path& file, const RunManifest& manifest);
    /// Opens and fully loads an existing store.
    static RunStore open(const std::filesystem::path& file);

    void append(const StoredDebate& record);        // DuplicateId per debate_id
    void append(const StoredFailure& record);       // repeatable (retries)
    void append(const StoredVerdict& record);       // DuplicateId per (id, judge)
    void append(const StoredJudgeFailure& record);  // repeatable

    const RunManifest& manifest() const { return manifest_; }
    const std::filesystem::path& file() const { return file_; }

    const std::map<std::string, StoredDebate>& debates() const { return debates_; }
    const std::vector<StoredFailure>& failures() const { return failures_; }
    const std::vector<StoredVerdict>& verdicts() const { return verdicts_; }
    const std::vector<StoredJudgeFailure>& judge_failures() const {
        return judge_failures_;
    }

    const StoredDebate* find_debate(const std::string& debate_id) const;
    /// Latest verdict for (debate, judge); re-judging appends parallel
    /// verdicts under other judge names rather than overwriting.
    const StoredVerdict* find_verdict(const std::string& debate_id,
                                      const std::string& judge_name) const;
    bool has_verdict(const std::string& debate_id, const std::string& judge_name) const;

    /// All judge names with at least one stored verdict.
    std::vector<std::string> judge_names() const;

private:
    RunStore() = default;
    void write_line(const std::string& line);
    void index_record(const nlohmann::json& doc, bool strict);

    std::filesystem::path file_;
    int fd_ = -1;
    RunManifest manifest_;
    std::map<std::string, StoredDebate> debates_;
    std::vector<StoredFailure> failures_;
    std::vector<StoredVerdict> verdicts_;
    std::vector<StoredJudgeFailure> judge_failures_;
    std::map<std::pair<std::string, std::string>, size_t> verdict_index_;
};

/// Debates still to run: the schedule minus debate ids whose verdict by
/// the manifest judge is already stored. Order follows the schedule.
std::vector<Pairing> resume_plan(const RunStore& store,
                                 const std::vector<Pairing>& schedule);

}  // namespace debatebench
