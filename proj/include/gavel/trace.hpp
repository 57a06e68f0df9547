#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gavel/errors.hpp"
#include "gavel/jsonl.hpp"

namespace gavel {

/// The eight legal reasoning error categories used by attribution and the
/// per-type correction strategies.
enum class ErrorType {
    LegalPrincipleMisapplication,
    FactsReasoningDiscrepancy,
    CompensationScopeError,
    UnenforceableJudgment,
    EvidenceChainError,
    JointLiabilityError,
    UnaddressedKeyDispute,
    SentencingBias,
};

inline constexpr ErrorType kAllErrorTypes[] = {
    ErrorType::LegalPrincipleMisapplication, ErrorType::FactsReasoningDiscrepancy,
    ErrorType::CompensationScopeError,       ErrorType::UnenforceableJudgment,
    ErrorType::EvidenceChainError,           ErrorType::JointLiabilityError,
    ErrorType::UnaddressedKeyDispute,        ErrorType::SentencingBias,
};

inline std::string to_string(ErrorType t) {
    switch (t) {
        case ErrorType::LegalPrincipleMisapplication: return "LegalPrincipleMisapplication";
        case ErrorType::FactsReasoningDiscrepancy: return "FactsReasoningDiscrepancy";
        case ErrorType::CompensationScopeError: return "CompensationScopeError";
        case ErrorType::UnenforceableJudgment: return "UnenforceableJudgment";
        case ErrorType::EvidenceChainError: return "EvidenceChainError";
        case ErrorType::JointLiabilityError: return "JointLiabilityError";
        case ErrorType::UnaddressedKeyDispute: return "UnaddressedKeyDispute";
        case ErrorType::SentencingBias: return "SentencingBias";
    }
    return "?";
}

inline std::optional<ErrorType> parse_error_type(const std::string& name) {
    for (ErrorType t : kAllErrorTypes)
        if (to_string(t) == name) return t;
    return std::nullopt;
}

/// Where a step's potential score came from.
enum class PerspectiveSource { JudgePrompt, LearnedHead, Rollout };

inline std::string to_string(PerspectiveSource s) {
    switch (s) {
        case PerspectiveSource::JudgePrompt: return "judge_prompt";
        case PerspectiveSource::LearnedHead: return "learned_head";
        case PerspectiveSource::Rollout: return "rollout";
    }
    return "?";
}

inline PerspectiveSource parse_perspective_source(const std::string& s) {
    if (s == "judge_prompt") return PerspectiveSource::JudgePrompt;
    if (s == "learned_head") return PerspectiveSource::LearnedHead;
    if (s == "rollout") return PerspectiveSource::Rollout;
    throw ValidationError("unknown perspective source: " + s, "perspective_source");
}

/// Per-step verification record. `aggregate` is always the exact minimum of
/// the three perspective scores and `flagged` is `aggregate < threshold`
/// (strict: an aggregate sitting exactly on the threshold passes).
struct StepVerification {
    double correctness = 0.0;
    double progressiveness = 0.0;
    double potential = 0.0;
    double aggregate = 0.0;
    bool flagged = false;
    PerspectiveSource perspective_source = PerspectiveSource::JudgePrompt;

    json to_json() const {
        return json{{"correctness", correctness},
                    {"progressiveness", progressiveness},
                    {"potential", potential},
                    {"aggregate", aggregate},
                    {"flagged", flagged},
                    {"perspective_source", to_string(perspective_source)}};
    }

    static StepVerification from_json(const json& j) {
        StepVerification v;
        v.correctness = j.at("correctness").get<double>();
        v.progressiveness = j.at("progressiveness").get<double>();
        v.potential = j.at("potential").get<double>();
        v.aggregate = j.at("aggregate").get<double>();
        v.flagged = j.at("flagged").get<bool>();
        v.perspective_source = parse_perspective_source(j.at("perspective_source").get<std::string>());
        return v;
    }
};

/// One entry in a correction strategy's audit trail: every retrieval hit,
/// fact link, calculation, and reflection performed while revising a step.
struct StrategyAction {
    std::string kind;   // retrieval | fact_link | calculation | reflection | benchmark | note
    std::string detail;
    json data = json::object();

    json to_json() const {
        json j{{"kind", kind}, {"detail", detail}};
        if (!data.empty()) j["data"] = data;
        return j;
    }

    static StrategyAction from_json(const json& j) {
        StrategyAction a;
        a.kind = j.at("kind").get<std::string>();
        a.detail = j.at("detail").get<std::string>();
        if (j.contains("data")) a.data = j["data"];
        return a;
    }
};

struct CorrectionRecord {
    int attempt = 1;
    ErrorType error_type = ErrorType::LegalPrincipleMisapplication;
    std::string evidence;
    std::vector<StrategyAction> strategy_trace;
    std::string revised_step;
    StepVerification re_verification;
    bool upheld = false;    // strategy concluded the step was correct as written
    bool degraded = false;  // required service missing, fell back to plain reflection

    json to_json() const {
        json actions = json::array();
        for (const auto& a : strategy_trace) actions.push_back(a.to_json());
        return json{{"attempt", attempt},
                    {"error_type", to_string(error_type)},
                    {"evidence", evidence},
                    {"strategy_trace", actions},
                    {"revised_step", revised_step},
                    {"re_verification", re_verification.to_json()},
                    {"upheld", upheld},
                    {"degraded", degraded}};
    }

    static CorrectionRecord from_json(const json& j) {
        CorrectionRecord r;
        r.attempt = j.at("attempt").get<int>();
        auto t = parse_error_type(j.at("error_type").get<std::string>());
        if (!t) throw ValidationError("unknown error type", "error_type");
        r.error_type = *t;
        r.evidence = j.value("evidence", "");
        for (const auto& a : j.at("strategy_trace"))
            r.strategy_trace.push_back(StrategyAction::from_json(a));
        r.revised_step = j.at("revised_step").get<std::string>();
        r.re_verification = StepVerification::from_json(j.at("re_verification"));
        r.upheld = j.value("upheld", false);
        r.degraded = j.value("degraded", false);
        return r;
    }
};

struct ReasoningStep {
    int index = 0; // 1-based
    std::string text;
    std::optional<StepVerification> verification;
    std::vector<CorrectionRecord> corrections;
    bool unresolved = false; // correction loop exhausted attempts without passing

    json to_json() const {
        json j{{"index", index}, {"text", text}};
        if (verification) j["verification"] = verification->to_json();
        if (!corrections.empty()) {
            json cs = json::array();
            for (const auto& c : corrections) cs.push_back(c.to_json());
            j["corrections"] = cs;
        }
        if (unresolved) j["unresolved"] = true;
        return j;
    }

    static ReasoningStep from_json(const json& j) {
        ReasoningStep s;
        s.index = j.at("index").get<int>();
        s.text = j.at("text").get<std::string>();
        if (j.contains("verification"))
            s.verification = StepVerification::from_json(j["verification"]);
        if (j.contains("corrections"))
            for (const auto& c : j["corrections"])
                s.corrections.push_back(CorrectionRecord::from_json(c));
        s.unresolved = j.value("unresolved", false);
        return s;
    }
};

struct JudgmentSet {
    std::vector<std::string> items;
    int final_decision = -1; // 0 reject, 1 support, -1 absent

    bool finalized() const { return final_decision == 0 || final_decision == 1; }

    void validate() const {
        if (finalized() && items.empty())
            throw ValidationError("finalized judgment set has no items", "items");
    }
};

struct ReasoningTrace {
    std::string case_id;
    std::vector<std::string> disputes;
    std::vector<ReasoningStep> steps;
    std::vector<std::string> judgments;
    int decision = -1;        // absent until finalized
    bool truncated = false;   // finalization forced at the step budget
    std::string template_version;

    bool finalized() const { return decision == 0 || decision == 1; }

    void validate() const {
        for (size_t i = 0; i < steps.size(); ++i)
            if (steps[i].index != static_cast<int>(i) + 1)
                throw ValidationError("step indices must be contiguous from 1", "steps");
        if (finalized() && (steps.empty() || judgments.empty()))
            throw ValidationError("finalized trace needs >=1 step and >=1 judgment", "decision");
    }

    json to_json() const {
        json ss = json::array();
        for (const auto& s : steps) ss.push_back(s.to_json());
        json j{{"case_id", case_id},
               {"disputes", disputes},
               {"steps", ss},
               {"judgments", judgments}};
        if (finalized()) j["decision"] = decision;
        if (truncated) j["truncated"] = true;
        if (!template_version.empty()) j["template_version"] = template_version;
        return j;
    }

    static ReasoningTrace from_json(const json& j) {
        ReasoningTrace t;
        t.case_id = j.at("case_id").get<std::string>();
        t.disputes = j.at("disputes").get<std::vector<std::string>>();
        for (const auto& s : j.at("steps")) t.steps.push_back(ReasoningStep::from_json(s));
        t.judgments = j.at("judgments").get<std::vector<std::string>>();
        t.decision = j.value("decision", -1);
        t.truncated = j.value("truncated", false);
        t.template_version = j.value("template_version", "");
        t.validate();
        return t;
    }
};

} // namespace gavel
