#pragma once

#include <optional>
#include <vector>

#include "debatebench/gateway.hpp"
#include "debatebench/store.hpp"
#include "debatebench/templates.hpp"
#include "debatebench/tournament.hpp"
#include "debatebench/util.hpp"

namespace debatebench {

struct RunnerOptions {
    int workers = 4;
    /// Process at most this many plan items in this invocation (batch
    /// quota; the run resumes from the store afterwards).
    std::optional<int> max_debates;
};

struct RunSummary {
    int planned = 0;            // plan size before the batch quota
    int attempted = 0;          // items processed this invocation
    int completed = 0;          // debate + verdict stored
    int debate_failures = 0;    // aborted debates (recorded for retry)
    int judge_call_failures = 0;  // transient judge errors, retried on resume
    int unrecoverable = 0;      // replies neither parser accepts

    bool all_verdicts() const {
        return attempted == planned && debate_failures == 0 &&
               judge_call_failures == 0 && unrecoverable == 0;
    }
};

/// Executes the plan with a bounded worker pool. Distinct debates run
/// concurrently; records are appended through a single writer in plan
/// order, so the store bytes do not depend on the worker count.
RunSummary run_tournament(RunStore& store, const std::vector<Pairing>& plan,
                          const TemplateSet& templates, Gateway& gateway,
                          const ModelId& judge_model, const Clock& clock,
                          const RunnerOptions& options);

/// Re-evaluates stored transcripts with a different judge, appending
/// parallel verdict records; existing verdicts are never touched. An
/// optional pair filter ("modelA:modelB", either orientation) restricts
/// the selection. Returns the number of new verdicts.
struct RejudgeSummary {
    int evaluated = 0;
    int skipped = 0;  // verdict by this judge already stored
    int unrecoverable = 0;
    int call_failures = 0;
};

RejudgeSummary rejudge(RunStore& store, const TemplateSet& templates, Gateway& gateway,
                       const ModelId& judge_model, const Clock& clock,
                       const std::optional<std::pair<std::string, std::string>>& pair_filter,
                       int workers);

}  // namespace debatebench
