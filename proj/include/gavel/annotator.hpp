#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gavel/backends.hpp"
#include "gavel/case_model.hpp"
#include "gavel/correction.hpp"
#include "gavel/errors.hpp"
#include "gavel/jsonl.hpp"
#include "gavel/prompts.hpp"
#include "gavel/reasoner.hpp"
#include "gavel/trace.hpp"
#include "gavel/verifier.hpp"

namespace gavel {

/// One verifier training label. `y` is always the exact minimum of the three
/// perspective labels.
struct AnnotationRecord {
    std::string case_id;
    int step_index = 0;
    std::string step_text;
    double correctness_label = 0.0;
    double progressiveness_label = 0.0;
    double potential_label = 0.0;
    double y = 0.0;
    std::optional<ErrorType> error_type;
    std::string correctness_rationale;
    std::string progressiveness_rationale;
    int potential_successes = 0;
    int potential_samples = 0;
    int potential_unfinalized = 0;

    void validate() const {
        double expected =
            std::min({correctness_label, progressiveness_label, potential_label});
        if (y != expected)
            throw ValidationError("y must equal min of the three labels", "y");
    }

    json to_json() const {
        json j{{"case_id", case_id},
               {"step_index", step_index},
               {"step_text", step_text},
               {"correctness_label", correctness_label},
               {"progressiveness_label", progressiveness_label},
               {"potential_label", potential_label},
               {"y", y},
               {"correctness_rationale", correctness_rationale},
               {"progressiveness_rationale", progressiveness_rationale},
               {"potential_successes", potential_successes},
               {"potential_samples", potential_samples},
               {"potential_unfinalized", potential_unfinalized}};
        if (error_type) j["error_type"] = to_string(*error_type);
        return j;
    }

    static AnnotationRecord from_json(const json& j) {
        AnnotationRecord r;
        r.case_id = j.at("case_id").get<std::string>();
        r.step_index = j.at("step_index").get<int>();
        r.step_text = j.at("step_text").get<std::string>();
        r.correctness_label = j.at("correctness_label").get<double>();
        r.progressiveness_label = j.at("progressiveness_label").get<double>();
        r.potential_label = j.at("potential_label").get<double>();
        r.y = j.at("y").get<double>();
        r.correctness_rationale = j.value("correctness_rationale", "");
        r.progressiveness_rationale = j.value("progressiveness_rationale", "");
        r.potential_successes = j.value("potential_successes", 0);
        r.potential_samples = j.value("potential_samples", 0);
        r.potential_unfinalized = j.value("potential_unfinalized", 0);
        if (j.contains("error_type")) {
            auto t = parse_error_type(j["error_type"].get<std::string>());
            if (!t) throw ValidationError("unknown error type", "error_type");
            r.error_type = *t;
        }
        r.validate();
        return r;
    }
};

struct AnnotatorConfig {
    int potential_samples = 8;
    double threshold = 0.5;
    bool binarize = false; // binarize the judge labels before the min

    void validate() const {
        if (potential_samples < 1)
            throw ValidationError("potential_samples must be >= 1", "potential_samples");
        if (!(threshold > 0.0 && threshold < 1.0))
            throw ValidationError("threshold must lie in (0,1)", "threshold");
    }
};

/// A step whose judges failed; exported next to the regular records, never
/// silently dropped.
struct QuarantineRecord {
    std::string case_id;
    int step_index = 0;
    std::string step_text;
    std::string error;

    json to_json() const {
        return json{{"case_id", case_id},
                    {"step_index", step_index},
                    {"step_text", step_text},
                    {"error", error}};
    }
};

struct AnnotationOutcome {
    std::vector<AnnotationRecord> records;
    std::vector<QuarantineRecord> quarantined;
};

/// Labels every step of a trace against the gold case: correctness and
/// progressiveness from judge prompts over the court's own reasoning,
/// potential from rollouts against the gold decision. Steps whose judges fail
/// are quarantined; the rest are still annotated.
inline AnnotationOutcome annotate_trace(const LegalCase& c, const ReasoningTrace& trace,
                                        ChatBackend& judge, ChatBackend& rollout_backend,
                                        const PromptLibrary& templates,
                                        const AnnotatorConfig& config,
                                        const ReasonerConfig& reasoner_config) {
    config.validate();
    if (c.gold_reasoning.empty() || !c.has_decision())
        throw Error("annotation-ineligible: case " + c.case_id +
                    " lacks gold reasoning or gold decision");

    AnnotationOutcome out;
    JudgeScoreBackend scorer(judge, templates, /*with_gold=*/true);
    std::vector<ReasoningStep> prefix;

    for (const auto& step : trace.steps) {
        ScoreContext ctx{&c, &prefix, &trace.disputes};
        AnnotationRecord rec;
        rec.case_id = c.case_id;
        rec.step_index = step.index;
        rec.step_text = step.text;
        try {
            rec.correctness_label = scorer.score_step(ctx, step.text, Perspective::Correctness);
            rec.correctness_rationale = scorer.last_rationale();
            rec.progressiveness_label =
                scorer.score_step(ctx, step.text, Perspective::Progressiveness);
            rec.progressiveness_rationale = scorer.last_rationale();
            if (config.binarize) {
                rec.correctness_label = rec.correctness_label >= 0.5 ? 1.0 : 0.0;
                rec.progressiveness_label = rec.progressiveness_label >= 0.5 ? 1.0 : 0.0;
            }

            // Potential of step k is estimated over the prefix s_1..s_k inclusive.
            std::vector<ReasoningStep> rollout_prefix = prefix;
            rollout_prefix.push_back(step);
            PotentialEstimate est = estimate_potential(
                make_rollout_fn(c, trace.disputes, rollout_prefix, rollout_backend, templates,
                                reasoner_config),
                config.potential_samples, c.gold_decision);
            rec.potential_label = est.value;
            rec.potential_successes = est.successes;
            rec.potential_samples = est.n;
            rec.potential_unfinalized = est.unfinalized;

            rec.y = std::min(
                {rec.correctness_label, rec.progressiveness_label, rec.potential_label});
            if (rec.y < config.threshold) {
                StepVerification v = make_verification(
                    rec.correctness_label, rec.progressiveness_label, rec.potential_label,
                    config.threshold, PerspectiveSource::Rollout);
                rec.error_type =
                    attribute_error(ctx, step, v, judge, templates).type;
            }
        } catch (const Error& e) {
            out.quarantined.push_back({c.case_id, step.index, step.text, e.what()});
            prefix.push_back(step);
            continue;
        }
        rec.validate();
        out.records.push_back(std::move(rec));
        prefix.push_back(step);
    }
    return out;
}

inline void export_jsonl(const std::vector<AnnotationRecord>& records,
                         const std::string& path) {
    for (const auto& r : records) r.validate();
    JsonlWriter w(path);
    for (const auto& r : records) w.write(r.to_json());
    w.close();
}

inline std::vector<AnnotationRecord> import_jsonl(const std::string& path) {
    std::vector<AnnotationRecord> out;
    for_each_jsonl(path, [&](const json& rec, int lineno) {
        try {
            out.push_back(AnnotationRecord::from_json(rec));
        } catch (const ValidationError& e) {
            throw ValidationError(std::string(e.what()) + " (line " + std::to_string(lineno) +
                                      ")",
                                  e.field());
        }
    });
    return out;
}

inline void export_quarantine(const std::vector<QuarantineRecord>& records,
                              const std::string& path) {
    JsonlWriter w(path);
    for (const auto& r : records) w.write(r.to_json());
    w.close();
}

/// Synthesizes one negative example per error type by perturbing a gold
/// reasoning step; labels are zero and the type is set by construction.
/// Synthetic rows carry step_index 0.
inline std::vector<AnnotationRecord> synthesize_negatives(const LegalCase& c, ChatBackend& chat,
                                                          const PromptLibrary& templates) {
    if (c.gold_reasoning.empty())
        throw Error("negative synthesis needs gold reasoning for case " + c.case_id);
    std::vector<AnnotationRecord> out;
    for (ErrorType t : kAllErrorTypes) {
        Prompt p = templates.render("synthesize_negative",
                                    {{"error_type", to_string(t)},
                                     {"error_description", error_type_description(t)},
                                     {"step", c.gold_reasoning.front()}});
        JudgeResult jr = judge_json(chat, p, {"step"});
        AnnotationRecord rec;
        rec.case_id = c.case_id;
        rec.step_index = 0;
        rec.step_text = jr.record["step"].get<std::string>();
        rec.error_type = t;
        rec.validate();
        out.push_back(std::move(rec));
    }
    return out;
}

struct HumanLabel {
    std::string case_id;
    int step_index = 0;
    bool flagged = false;
    std::optional<ErrorType> error_type;
};

struct AgreementReport {
    double verification_accuracy = 0.0;
    double attribution_accuracy = 0.0;
};

/// Agreement between automatic records and human labels aligned by
/// (case_id, step_index). Verification compares the y < T flag; attribution
/// compares error types over human-flagged steps that carry a type.
inline AgreementReport annotation_agreement(const std::vector<AnnotationRecord>& autos,
                                            const std::vector<HumanLabel>& humans,
                                            double threshold) {
    if (humans.empty()) throw ValidationError("human label set is empty", "human");
    std::map<std::pair<std::string, int>, const AnnotationRecord*> by_key;
    for (const auto& r : autos) by_key[{r.case_id, r.step_index}] = &r;

    std::vector<std::string> orphans;
    for (const auto& h : humans)
        if (!by_key.count({h.case_id, h.step_index}))
            orphans.push_back(h.case_id + "#" + std::to_string(h.step_index));
    if (!orphans.empty())
        throw Error("alignment error, human labels without matching records: " +
                    join(orphans, ", "));

    int flag_matches = 0;
    int attributed = 0, attribution_matches = 0;
    for (const auto& h : humans) {
        const AnnotationRecord& r = *by_key.at({h.case_id, h.step_index});
        bool auto_flag = r.y < threshold;
        if (auto_flag == h.flagged) ++flag_matches;
        if (h.flagged && h.error_type) {
            ++attributed;
            if (r.error_type && *r.error_type == *h.error_type) ++attribution_matches;
        }
    }
    AgreementReport report;
    report.verification_accuracy =
        static_cast<double>(flag_matches) / static_cast<double>(humans.size());
    report.attribution_accuracy =
        attributed == 0 ? 0.0
                        : static_cast<double>(attribution_matches) /
                              static_cast<double>(attributed);
    return report;
}

} // namespace gavel
