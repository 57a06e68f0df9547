#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gavel/backends.hpp"
#include "gavel/case_model.hpp"
#include "gavel/correction.hpp"
#include "gavel/errors.hpp"
#include "gavel/prompts.hpp"
#include "gavel/trace.hpp"
#include "gavel/util.hpp"
#include "gavel/verifier.hpp"

namespace gavel {

struct ReasonerConfig {
    int max_steps = 12;
    std::string finalize_marker = "FINAL_JUDGMENT:";
    std::string dispute_template = "disputes";
    std::string step_template = "step";
    std::string finalize_template = "finalize";
    std::string rollout_template = "rollout";

    void validate() const {
        if (max_steps < 1) throw ValidationError("max_steps must be >= 1", "max_steps");
        if (finalize_marker.empty())
            throw ValidationError("finalize_marker must be non-empty", "finalize_marker");
    }
};

/// Finds the finalize marker and parses the judgment JSON after it.
inline std::optional<JudgmentSet> parse_finalize(const std::string& text,
                                                 const std::string& marker) {
    size_t at = text.find(marker);
    if (at == std::string::npos) return std::nullopt;
    auto obj = extract_json_object(text.substr(at + marker.size()));
    if (!obj || !obj->contains("judgments") || !obj->contains("decision")) return std::nullopt;
    JudgmentSet js;
    for (const auto& item : (*obj)["judgments"])
        if (item.is_string()) js.items.push_back(item.get<std::string>());
    const json& d = (*obj)["decision"];
    if (d.is_string()) {
        if (d == "support") js.final_decision = 1;
        else if (d == "reject") js.final_decision = 0;
        else return std::nullopt;
    } else if (d.is_number_integer() && (d == 0 || d == 1)) {
        js.final_decision = d.get<int>();
    } else {
        return std::nullopt;
    }
    if (js.items.empty()) return std::nullopt;
    return js;
}

inline std::string steps_text(const std::vector<ReasoningStep>& steps) {
    if (steps.empty()) return "(none yet)";
    std::vector<std::string> lines;
    for (const auto& s : steps) lines.push_back(std::to_string(s.index) + ". " + s.text);
    return join(lines, "\n");
}

inline std::vector<std::string> identify_disputes(const LegalCase& c, ChatBackend& chat,
                                                  const PromptLibrary& templates,
                                                  const ReasonerConfig& config) {
    c.validate();
    Prompt p = templates.render(config.dispute_template,
                                {{"claim", c.claim}, {"facts", join(c.facts, "\n")}});
    JudgeResult jr = judge_json(chat, p, {"disputes"});
    std::vector<std::string> disputes;
    for (const auto& d : jr.record["disputes"])
        if (d.is_string() && !d.get<std::string>().empty())
            disputes.push_back(d.get<std::string>());
    if (disputes.empty())
        throw Error("dispute identification returned no disputes for case " + c.case_id);
    return disputes;
}

/// Either the next reasoning step or the finalize signal.
struct StepOutcome {
    std::optional<ReasoningStep> step;
    std::optional<JudgmentSet> judgments;
};

inline StepOutcome next_step(const LegalCase& c, const std::vector<std::string>& disputes,
                             const ReasoningTrace& so_far, ChatBackend& chat,
                             const PromptLibrary& templates, const ReasonerConfig& config,
                             const SamplingParams& sampling = {}) {
    config.validate();
    if (static_cast<int>(so_far.steps.size()) >= config.max_steps)
        throw ValidationError("trace already at max_steps", "max_steps");
    Prompt p = templates.render(config.step_template,
                                {{"claim", c.claim},
                                 {"facts", join(c.facts, "\n")},
                                 {"disputes", join(disputes, "\n")},
                                 {"steps", steps_text(so_far.steps)},
                                 {"finalize_marker", config.finalize_marker}});
    std::string raw = chat.complete(p, sampling);
    if (auto js = parse_finalize(raw, config.finalize_marker)) {
        js->validate();
        return {std::nullopt, js};
    }
    std::string text = trim(raw);
    if (text.empty())
        throw BackendError("step generation returned empty text", /*retryable=*/false, raw);
    ReasoningStep step;
    step.index = static_cast<int>(so_far.steps.size()) + 1;
    step.text = text;
    return {step, std::nullopt};
}

/// Forced finalization through the dedicated finalize prompt; used when the
/// step budget runs out without a natural conclusion.
inline JudgmentSet force_finalize(const LegalCase& c, const std::vector<std::string>& disputes,
                                  const std::vector<ReasoningStep>& steps, ChatBackend& chat,
                                  const PromptLibrary& templates, const ReasonerConfig& config) {
    Prompt p = templates.render(config.finalize_template,
                                {{"claim", c.claim},
                                 {"disputes", join(disputes, "\n")},
                                 {"steps", steps_text(steps)},
                                 {"finalize_marker", config.finalize_marker}});
    std::string raw = chat.complete(p, {});
    auto js = parse_finalize(raw, config.finalize_marker);
    if (!js)
        throw BackendError("forced finalization did not produce a judgment", /*retryable=*/false,
                           raw);
    js->validate();
    return *js;
}

/// Builds the rollout used for potential estimation: a one-shot completion of
/// the remaining reasoning from a copied prefix. Per-sample seeds derive from
/// (case_id, step index, sample index); temperature 0.7 for diversity.
inline RolloutFn make_rollout_fn(const LegalCase& c, std::vector<std::string> disputes,
                                 std::vector<ReasoningStep> prefix, ChatBackend& chat,
                                 const PromptLibrary& templates, const ReasonerConfig& config) {
    std::string prompt_steps = steps_text(prefix);
    size_t step_index = prefix.size();
    return [&chat, &templates, config, c_claim = c.claim, c_facts = join(c.facts, "\n"),
            d = join(disputes, "\n"), prompt_steps, step_index,
            case_id = c.case_id](int sample_index) -> std::optional<int> {
        Prompt p = templates.render(config.rollout_template,
                                    {{"claim", c_claim},
                                     {"facts", c_facts},
                                     {"disputes", d},
                                     {"steps", prompt_steps},
                                     {"finalize_marker", config.finalize_marker}});
        SamplingParams sampling;
        sampling.temperature = 0.7;
        sampling.seed = fnv1a64(case_id + ":" + std::to_string(step_index) + ":" +
                                std::to_string(sample_index));
        sampling.sample_index = sample_index;
        std::string raw;
        try {
            raw = chat.complete(p, sampling);
        } catch (const Error&) {
            return std::nullopt;
        }
        auto js = parse_finalize(raw, config.finalize_marker);
        if (!js) return std::nullopt;
        return js->final_decision;
    };
}

/// Per-run wiring shared by every case.
struct RunContext {
    ChatBackend* chat = nullptr;
    const PromptLibrary* templates = nullptr;
    ReasonerConfig reasoner;
    VerifierConfig verifier;
    PerspectiveRouting routing;
    CorrectionConfig correction;
    CorrectionServices* correction_services = nullptr; // optional; needed when corrections run
};

/// The full per-case loop: disputes, then one verified step at a time, with
/// the correction loop on flagged steps, until finalization (forced at the
/// step budget and marked truncated).
inline ReasoningTrace run_reasoning(const LegalCase& c, RunContext& rc) {
    c.validate();
    rc.reasoner.validate();
    rc.verifier.validate();

    ReasoningTrace trace;
    trace.case_id = c.case_id;
    trace.template_version = rc.templates->version();
    trace.disputes = identify_disputes(c, *rc.chat, *rc.templates, rc.reasoner);

    while (static_cast<int>(trace.steps.size()) < rc.reasoner.max_steps) {
        StepOutcome outcome;
        try {
            outcome = next_step(c, trace.disputes, trace, *rc.chat, *rc.templates, rc.reasoner);
        } catch (const Error& e) {
            throw Error("case " + c.case_id + " step " +
                        std::to_string(trace.steps.size() + 1) + ": " + e.what());
        }
        if (outcome.judgments) {
            trace.judgments = outcome.judgments->items;
            trace.decision = outcome.judgments->final_decision;
            break;
        }

        ReasoningStep step = *outcome.step;
        ScoreContext ctx{&c, &trace.steps, &trace.disputes};
        StepVerification verification;
        try {
            verification = score_step(ctx, step.text, rc.routing, rc.verifier);
        } catch (const Error& e) {
            throw Error("case " + c.case_id + " step " + std::to_string(step.index) + ": " +
                        e.what());
        }
        step.verification = verification;

        if (verification.flagged && rc.correction.max_correction_attempts > 0 &&
            rc.correction_services) {
            CorrectionServices& services = *rc.correction_services;
            services.context = ctx;
            services.verify = [&](const ReasoningStep& candidate) {
                return score_step(ctx, candidate.text, rc.routing, rc.verifier);
            };
            try {
                step = correction_loop(step, verification, services, rc.correction);
            } catch (const Error& e) {
                throw Error("case " + c.case_id + " step " + std::to_string(step.index) +
                            " correction: " + e.what());
            }
        } else if (verification.flagged) {
            step.unresolved = true;
        }
        trace.steps.push_back(std::move(step));
    }

    if (!trace.finalized()) {
        JudgmentSet js = force_finalize(c, trace.disputes, trace.steps, *rc.chat, *rc.templates,
                                        rc.reasoner);
        trace.judgments = js.items;
        trace.decision = js.final_decision;
        trace.truncated = true;
    }
    trace.validate();
    return trace;
}

} // namespace gavel
