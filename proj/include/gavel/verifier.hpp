#pragma once

#include <algorithm>
#include <functional>
#include <optional>

#include "gavel/backends.hpp"
#include "gavel/errors.hpp"
#include "gavel/trace.hpp"

namespace gavel {

struct VerifierConfig {
    double threshold = 0.5;        // T
    int potential_samples = 8;     // N for rollout-based potential
    bool fail_flags = false;       // perspective failure flags the step instead of aborting
    PerspectiveSource potential_source = PerspectiveSource::JudgePrompt;

    void validate() const {
        if (!(threshold > 0.0 && threshold < 1.0))
            throw ValidationError("threshold must lie in (0,1)", "threshold");
        if (potential_samples < 1)
            throw ValidationError("potential_samples must be >= 1", "potential_samples");
    }
};

/// Which ScoreBackend serves each perspective. In annotation mode `potential`
/// is ignored (rollouts serve it); at inference it must be set.
struct PerspectiveRouting {
    ScoreBackend* correctness = nullptr;
    ScoreBackend* progressiveness = nullptr;
    ScoreBackend* potential = nullptr;

    ScoreBackend* route(Perspective p) const {
        switch (p) {
            case Perspective::Correctness: return correctness;
            case Perspective::Progressiveness: return progressiveness;
            case Perspective::Potential: return potential;
        }
        return nullptr;
    }
};

/// Builds the verification record: aggregate is the exact minimum of the three
/// scores, never an average, and the flag uses strict `aggregate < threshold`
/// so a boundary aggregate passes.
inline StepVerification make_verification(double correctness, double progressiveness,
                                          double potential, double threshold,
                                          PerspectiveSource source) {
    for (double v : {correctness, progressiveness, potential})
        if (v < 0.0 || v > 1.0)
            throw BackendError("perspective score out of [0,1]: " + std::to_string(v),
                               /*retryable=*/false);
    StepVerification v;
    v.correctness = correctness;
    v.progressiveness = progressiveness;
    v.potential = potential;
    v.aggregate = std::min({correctness, progressiveness, potential});
    v.flagged = v.aggregate < threshold;
    v.perspective_source = source;
    return v;
}

/// Scores one step from all three perspectives through the routed backends.
/// A perspective failure flags the step when config.fail_flags is set,
/// otherwise propagates naming the perspective.
inline StepVerification score_step(const ScoreContext& ctx, const std::string& step_text,
                                   const PerspectiveRouting& routing,
                                   const VerifierConfig& config) {
    config.validate();
    if (step_text.empty()) throw ValidationError("step must be non-empty", "step");

    auto one = [&](Perspective p) -> double {
        ScoreBackend* backend = routing.route(p);
        if (!backend)
            throw BackendError("no backend routed for perspective " + to_string(p),
                               /*retryable=*/false);
        double v;
        try {
            v = backend->score_step(ctx, step_text, p);
        } catch (const Error& e) {
            if (config.fail_flags) return 0.0; // forces the minimum below any threshold
            throw BackendError("verification failed on perspective " + to_string(p) + ": " +
                                   e.what(),
                               /*retryable=*/false);
        }
        if (v < 0.0 || v > 1.0)
            throw BackendError("perspective " + to_string(p) + " returned out-of-range score " +
                                   std::to_string(v),
                               /*retryable=*/false);
        return v;
    };

    double c = one(Perspective::Correctness);
    double g = one(Perspective::Progressiveness);
    double t = one(Perspective::Potential);
    return make_verification(c, g, t, config.threshold, config.potential_source);
}

/// Empirical potential of a reasoning prefix. `value` is exactly
/// successes / N where a success is a rollout whose final decision equals the
/// gold decision; rollouts that fail to finalize count as failures and are
/// tallied separately.
struct PotentialEstimate {
    double value = 0.0;
    int successes = 0;
    int n = 0;
    int unfinalized = 0;
};

/// `rollout` draws completion #sample_index from the (copied) prefix and
/// returns its final decision, or nullopt when it never finalized.
using RolloutFn = std::function<std::optional<int>(int sample_index)>;

inline PotentialEstimate estimate_potential(const RolloutFn& rollout, int n, int gold_decision) {
    if (n < 1) throw ValidationError("N must be >= 1", "potential_samples");
    if (gold_decision != 0 && gold_decision != 1)
        throw ValidationError("gold decision must be 0 or 1", "gold_decision");
    PotentialEstimate est;
    est.n = n;
    for (int j = 0; j < n; ++j) {
        std::optional<int> d = rollout(j);
        if (!d) {
            ++est.unfinalized;
            continue;
        }
        if (*d == gold_decision) ++est.successes;
    }
    est.value = static_cast<double>(est.successes) / static_cast<double>(n);
    return est;
}

/// Adapts a rollout run into a potential-perspective ScoreBackend for
/// annotation-mode routing.
class RolloutScoreBackend : public ScoreBackend {
public:
    using Factory = std::function<RolloutFn(const ScoreContext&, const std::string& step_text)>;

    RolloutScoreBackend(Factory factory, int n) : factory_(std::move(factory)), n_(n) {}

    double score_step(const ScoreContext& ctx, const std::string& step_text,
                      Perspective perspective) override {
        if (perspective != Perspective::Potential)
            throw BackendError("rollout backend serves only the potential perspective",
                               /*retryable=*/false);
        if (!ctx.legal_case || !ctx.legal_case->has_decision())
            throw BackendError("rollout potential requires a gold decision",
                               /*retryable=*/false);
        PotentialEstimate est =
            estimate_potential(factory_(ctx, step_text), n_, ctx.legal_case->gold_decision);
        last_ = est;
        return est.value;
    }

    const PotentialEstimate& last_estimate() const { return last_; }

private:
    Factory factory_;
    int n_;
    PotentialEstimate last_;
};

} // namespace gavel
