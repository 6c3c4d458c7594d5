#include "debatebench/runner.hpp"

#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

#include "debatebench/errors.hpp"

namespace debatebench {

namespace {

struct ItemResult {
    std::optional<StoredDebate> debate;  // absent when the transcript was reused
    std::optional<StoredVerdict> verdict;
    std::optional<StoredJudgeFailure> judge_failure;
    std::optional<StoredFailure> failure;
    bool judge_call_failed = false;
};

// Runs plan items on `workers` threads and hands each result to `commit`
// in plan order, on the calling thread.
void run_ordered(size_t count, int workers,
                 const std::function<ItemResult(size_t)>& execute,
                 const std::function<void(size_t, ItemResult&&)>& commit) {
    std::mutex mu;
    std::condition_variable cv;
    std::map<size_t, ItemResult> ready;
    std::atomic<size_t> next_item{0};

    int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n));
    for (int w = 0; w < n; ++w) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next_item.fetch_add(1);
                if (i >= count) return;
                ItemResult result = execute(i);
                {
                    std::lock_guard<std::mutex> lock(mu);
                    ready.emplace(i, std::move(result));
                }
                cv.notify_one();
            }
        });
    }

    try {
        size_t committed = 0;
        while (committed < count) {
            std::unique_lock<std::mutex> lock(mu);
            cv.wait(lock, [&] { return ready.count(committed) > 0; });
            ItemResult result = std::move(ready.at(committed));
            ready.erase(committed);
            lock.unlock();
            commit(committed, std::move(result));
            ++committed;
        }
    } catch (...) {
        next_item.store(count);  // stop dispatching
        for (std::thread& t : pool) t.join();
        throw;
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace

RunSummary run_tournament(RunStore& store, const std::vector<Pairing>& plan,
                          const TemplateSet& templates, Gateway& gateway,
                          const ModelId& judge_model, const Clock& clock,
                          const RunnerOptions& options) {
    RunSummary summary;
    summary.planned = static_cast<int>(plan.size());

    size_t count = plan.size();
    if (options.max_debates && *options.max_debates >= 0) {
        count = std::min<size_t>(count, static_cast<size_t>(*options.max_debates));
    }
    summary.attempted = static_cast<int>(count);
    if (count == 0) return summary;

    const std::string& run_id = store.manifest().run_id;
    int rounds = store.manifest().rounds;

    // Snapshot existing transcripts up front; workers must not touch the
    // store while the writer appends.
    std::vector<std::optional<Transcript>> existing(count);
    std::vector<std::string> ids(count);
    for (size_t i = 0; i < count; ++i) {
        ids[i] = make_debate_id(run_id, plan[i]);
        if (const StoredDebate* d = store.find_debate(ids[i])) {
            existing[i] = d->transcript;
        }
    }

    auto execute = [&](size_t i) -> ItemResult {
        ItemResult result;
        const Pairing& pairing = plan[i];
        Transcript transcript;
        try {
            if (existing[i]) {
                transcript = *existing[i];
            } else {
                DebateSpec spec;
                spec.topic = pairing.topic;
                spec.first_mover = pairing.first_mover();
                spec.second_mover = pairing.second_mover();
                spec.rounds = rounds;
                transcript = run_debate(spec, templates, gateway, clock);
                result.debate = StoredDebate{ids[i], pairing, transcript,
                                             iso8601_utc(clock.now())};
            }
        } catch (const TurnFailed& e) {
            result.failure = StoredFailure{ids[i], e.turn_index(), e.cause(),
                                           iso8601_utc(clock.now())};
            return result;
        } catch (const std::exception& e) {
            result.failure = StoredFailure{ids[i], 0, e.what(), iso8601_utc(clock.now())};
            return result;
        }

        try {
            JudgeVerdict verdict = evaluate(transcript, judge_model, templates, gateway);
            result.verdict = StoredVerdict{ids[i], verdict, iso8601_utc(clock.now())};
        } catch (const VerdictUnrecoverable& e) {
            result.judge_failure = StoredJudgeFailure{
                ids[i], judge_model, e.raw_reply(), e.what(), iso8601_utc(clock.now())};
        } catch (const std::exception&) {
            // transient judge error; the transcript is kept and the
            // verdict is retried on resume
            result.judge_call_failed = true;
        }
        return result;
    };

    auto commit = [&](size_t, ItemResult&& result) {
        if (result.failure) {
            store.append(*result.failure);
            ++summary.debate_failures;
            return;
        }
        if (result.debate) store.append(*result.debate);
        if (result.verdict) {
            store.append(*result.verdict);
            ++summary.completed;
        } else if (result.judge_failure) {
            store.append(*result.judge_failure);
            ++summary.unrecoverable;
        } else if (result.judge_call_failed) {
            ++summary.judge_call_failures;
        }
    };

    run_ordered(count, options.workers, execute, commit);
    return summary;
}

RejudgeSummary rejudge(RunStore& store, const TemplateSet& templates, Gateway& gateway,
                       const ModelId& judge_model, const Clock& clock,
                       const std::optional<std::pair<std::string, std::string>>& pair_filter,
                       int workers) {
    RejudgeSummary summary;

    std::vector<const StoredDebate*> targets;
    for (const auto& [id, debate] : store.debates()) {
        if (pair_filter) {
            const std::string& a = debate.pairing.model_a.name;
            const std::string& b = debate.pairing.model_b.name;
            bool match = (a == pair_filter->first && b == pair_filter->second) ||
                         (a == pair_filter->second && b == pair_filter->first);
            if (!match) continue;
        }
        if (store.has_verdict(id, judge_model.name)) {
            ++summary.skipped;
            continue;
        }
        targets.push_back(&debate);
    }

    struct Slot {
        std::optional<StoredVerdict> verdict;
        std::optional<StoredJudgeFailure> failure;
        bool call_failed = false;
    };
    std::vector<Slot> slots(targets.size());

    // Evaluation is reentrant; concurrency is bounded by the gateway.
    std::atomic<size_t> next{0};
    int n = std::max(1, std::min<int>(workers, static_cast<int>(targets.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= targets.size()) return;
                const StoredDebate& debate = *targets[i];
                try {
                    JudgeVerdict verdict =
                        evaluate(debate.transcript, judge_model, templates, gateway);
                    slots[i].verdict = StoredVerdict{debate.debate_id, verdict,
                                                     iso8601_utc(clock.now())};
                } catch (const VerdictUnrecoverable& e) {
                    slots[i].failure =
                        StoredJudgeFailure{debate.debate_id, judge_model, e.raw_reply(),
                                           e.what(), iso8601_utc(clock.now())};
                } catch (const std::exception&) {
                    slots[i].call_failed = true;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();

    for (Slot& slot : slots) {
        if (slot.verdict) {
            store.append(*slot.verdict);
            ++summary.evaluated;
        } else if (slot.failure) {
            store.append(*slot.failure);
            ++summary.unrecoverable;
        } else if (slot.call_failed) {
            ++summary.call_failures;
        }
    }
    return summary;
}

}  // namespace debatebench
