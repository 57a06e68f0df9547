#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gavel/backends.hpp"
#include "gavel/case_model.hpp"
#include "gavel/errors.hpp"
#include "gavel/trace.hpp"

namespace gavel {

/// N finalized candidate traces for one case.
struct CandidateSet {
    std::string case_id;
    std::vector<ReasoningTrace> candidates;

    int n() const { return static_cast<int>(candidates.size()); }

    void validate() const {
        if (candidates.empty()) throw ValidationError("need at least one candidate", "candidates");
        for (size_t i = 0; i < candidates.size(); ++i)
            if (!candidates[i].finalized())
                throw ValidationError("candidate " + std::to_string(i) + " is not finalized",
                                      "candidates");
    }
};

struct SelectionResult {
    int decision = 0;
    size_t chosen_index = 0;
};

/// Candidate trace score: the minimum step aggregate along the trace, the
/// step-level min rule lifted to whole candidates. Throws when a step lacks
/// verification.
inline double trace_min_aggregate(const ReasoningTrace& trace, size_t candidate_index = 0) {
    if (trace.steps.empty())
        throw ValidationError("candidate " + std::to_string(candidate_index) + " has no steps",
                              "steps");
    double best = 1.0;
    for (const auto& s : trace.steps) {
        if (!s.verification)
            throw ValidationError("candidate " + std::to_string(candidate_index) + " step " +
                                      std::to_string(s.index) + " is unscored",
                                  "verification");
        best = std::min(best, s.verification->aggregate);
    }
    return best;
}

namespace detail {

/// Pooled mean of step aggregates across all candidates with `decision`;
/// nullopt when any such step is unscored or there are none.
inline std::optional<double> side_mean_aggregate(const CandidateSet& set, int decision) {
    double sum = 0.0;
    size_t count = 0;
    for (const auto& c : set.candidates) {
        if (c.decision != decision) continue;
        for (const auto& s : c.steps) {
            if (!s.verification) return std::nullopt;
            sum += s.verification->aggregate;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

} // namespace detail

/// Majority vote over candidate decisions. Ties resolve toward the side with
/// the higher pooled mean step aggregate; with no usable scores (or a second
/// tie) the conservative outcome 0 wins. The chosen trace is the first
/// candidate carrying the winning decision.
inline SelectionResult select_self_consistency(const CandidateSet& set) {
    set.validate();
    int support = 0, reject = 0;
    for (const auto& c : set.candidates) (c.decision == 1 ? support : reject)++;

    int decision;
    if (support != reject) {
        decision = support > reject ? 1 : 0;
    } else {
        auto m1 = detail::side_mean_aggregate(set, 1);
        auto m0 = detail::side_mean_aggregate(set, 0);
        if (m1 && m0 && *m1 != *m0)
            decision = *m1 > *m0 ? 1 : 0;
        else
            decision = 0;
    }
    for (size_t i = 0; i < set.candidates.size(); ++i)
        if (set.candidates[i].decision == decision) return {decision, i};
    return {decision, 0}; // unreachable: a tie implies both sides exist
}

/// Argmax by judgment-level outcome score; scoring failures exclude the
/// candidate with a warning, ties resolve to the lower index.
inline SelectionResult select_outcome_verifier(const CandidateSet& set, const LegalCase& c,
                                               OutcomeScorer& scorer,
                                               std::vector<std::string>* warnings = nullptr) {
    set.validate();
    std::optional<size_t> best;
    double best_score = 0.0;
    for (size_t i = 0; i < set.candidates.size(); ++i) {
        double score;
        try {
            score = scorer.score_outcome(c, set.candidates[i].judgments,
                                         set.candidates[i].decision);
        } catch (const Error& e) {
            if (warnings)
                warnings->push_back("candidate " + std::to_string(i) + " excluded: " + e.what());
            continue;
        }
        if (!best || score > best_score) {
            best = i;
            best_score = score;
        }
    }
    if (!best) throw Error("outcome selection failed: every candidate was excluded");
    return {set.candidates[*best].decision, *best};
}

/// Argmax by min-step-aggregate trace score; ties resolve to the lower index.
inline SelectionResult select_process_verifier(const CandidateSet& set) {
    set.validate();
    size_t best = 0;
    double best_score = -1.0;
    for (size_t i = 0; i < set.candidates.size(); ++i) {
        double score = trace_min_aggregate(set.candidates[i], i);
        if (score > best_score) {
            best = i;
            best_score = score;
        }
    }
    return {set.candidates[best].decision, best};
}

} // namespace gavel
