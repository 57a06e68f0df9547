#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gavel/case_model.hpp"
#include "gavel/errors.hpp"
#include "gavel/jsonl.hpp"
#include "gavel/prompts.hpp"
#include "gavel/trace.hpp"

namespace gavel {

struct SamplingParams {
    double temperature = 0.0;
    uint64_t seed = 0;
    int max_tokens = 2048;
    int n_samples = 1;
    int sample_index = 0; // which sample this call is, when invoked one at a time

    void validate() const {
        if (temperature < 0.0) throw ValidationError("temperature must be >= 0", "temperature");
        if (max_tokens < 1) throw ValidationError("max_tokens must be >= 1", "max_tokens");
        if (n_samples < 1) throw ValidationError("n_samples must be >= 1", "n_samples");
    }
};

/// Token-level probabilities for the first generated position, exposed only by
/// backends with supports_logprobs().
struct TokenLogprobs {
    std::map<std::string, double> top_logprobs;
};

/// Text-generation backend. Implementations must be safe for concurrent calls;
/// scripted ones are bit-deterministic for identical (prompt, sample_index).
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string name() const = 0;
    virtual bool supports_logprobs() const { return false; }

    /// One completion for (prompt, sampling.sample_index).
    virtual std::string complete(const Prompt& prompt, const SamplingParams& sampling) = 0;

    virtual TokenLogprobs first_token_logprobs(const Prompt&, const SamplingParams&) {
        throw BackendError("backend does not support logprobs", /*retryable=*/false);
    }
};

struct Completion {
    int sample_index = 0;
    std::string text;
};

/// Draws sampling.n_samples completions, tagged with their sample index.
inline std::vector<Completion> generate(ChatBackend& backend, const Prompt& prompt,
                                        SamplingParams sampling) {
    sampling.validate();
    if (prompt.text.empty()) throw ValidationError("prompt must be non-empty", "prompt");
    std::vector<Completion> out;
    out.reserve(static_cast<size_t>(sampling.n_samples));
    for (int i = 0; i < sampling.n_samples; ++i) {
        SamplingParams s = sampling;
        s.sample_index = i;
        out.push_back({i, backend.complete(prompt, s)});
    }
    return out;
}

/// Finds the outermost JSON object embedded in free text.
inline std::optional<json> extract_json_object(const std::string& text) {
    size_t start = text.find('{');
    if (start == std::string::npos) return std::nullopt;
    size_t end = text.rfind('}');
    if (end == std::string::npos || end < start) return std::nullopt;
    try {
        return json::parse(text.substr(start, end - start + 1));
    } catch (const json::parse_error&) {
        return std::nullopt;
    }
}

struct JudgeResult {
    json record;
    int retry_count = 0;
};

/// Runs an LLM-as-judge call expecting a JSON object with `schema_fields`.
/// One automatic re-prompt on parse failure, then JudgeFormatError carrying
/// both raw payloads.
inline JudgeResult judge_json(ChatBackend& backend, const Prompt& prompt,
                              const std::vector<std::string>& schema_fields,
                              SamplingParams sampling = {}) {
    if (schema_fields.empty()) throw ValidationError("schema must be non-empty", "schema");
    auto try_parse = [&](const std::string& raw) -> std::optional<json> {
        auto obj = extract_json_object(raw);
        if (!obj) return std::nullopt;
        for (const auto& f : schema_fields)
            if (!obj->contains(f)) return std::nullopt;
        return obj;
    };

    std::string first_raw = backend.complete(prompt, sampling);
    if (auto obj = try_parse(first_raw)) return {*obj, 0};

    Prompt retry = prompt;
    retry.text += "\n\nYour previous reply was not valid. Return strictly one JSON object "
                  "with the fields: " + join(schema_fields, ", ") + ".";
    std::string second_raw = backend.complete(retry, sampling);
    if (auto obj = try_parse(second_raw)) return {*obj, 1};

    throw JudgeFormatError("judge output failed schema [" + join(schema_fields, ", ") +
                               "] twice for template " + prompt.template_id,
                           first_raw, second_raw);
}

/// Parses a judge score field, rejecting (not clamping) out-of-range values.
inline double require_unit_score(const json& obj, const std::string& field) {
    if (!obj.contains(field) || !obj[field].is_number())
        throw BackendError("judge returned no numeric \"" + field + "\"", false, obj.dump());
    double v = obj[field].get<double>();
    if (v < 0.0 || v > 1.0)
        throw BackendError("judge score out of [0,1]: " + std::to_string(v), false, obj.dump());
    return v;
}

enum class Perspective { Correctness, Progressiveness, Potential };

inline std::string to_string(Perspective p) {
    switch (p) {
        case Perspective::Correctness: return "correctness";
        case Perspective::Progressiveness: return "progressiveness";
        case Perspective::Potential: return "potential";
    }
    return "?";
}

/// Everything a step scorer may look at: the case, the accepted prefix, and
/// the disputes. Pointers are non-owning and must outlive the call.
struct ScoreContext {
    const LegalCase* legal_case = nullptr;
    const std::vector<ReasoningStep>* prefix = nullptr;
    const std::vector<std::string>* disputes = nullptr;

    std::string facts_text() const {
        return legal_case ? join(legal_case->facts, "\n") : "";
    }
    std::string disputes_text() const {
        return disputes ? join(*disputes, "\n") : "";
    }
    std::string steps_text() const {
        if (!prefix) return "";
        std::vector<std::string> lines;
        for (const auto& s : *prefix)
            lines.push_back(std::to_string(s.index) + ". " + s.text);
        return join(lines, "\n");
    }
};

/// Per-step scorer for one verification perspective. Values outside [0,1]
/// are an error at the caller, never silently clamped.
class ScoreBackend {
public:
    virtual ~ScoreBackend() = default;
    virtual double score_step(const ScoreContext& ctx, const std::string& step_text,
                              Perspective perspective) = 0;
};

/// Judgment-level scorer used by the outcome-verifier selection baseline.
class OutcomeScorer {
public:
    virtual ~OutcomeScorer() = default;
    virtual double score_outcome(const LegalCase& c, const std::vector<std::string>& judgments,
                                 int decision) = 0;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual size_t dimension() const = 0;
    virtual std::vector<float> embed(const std::string& text) = 0;
};

/// ScoreBackend that asks a chat backend through a judge prompt and parses
/// {"score": x, "rationale": ...}. With gold context it uses the annotation
/// templates, otherwise the inference ones.
class JudgeScoreBackend : public ScoreBackend {
public:
    JudgeScoreBackend(ChatBackend& chat, const PromptLibrary& templates, bool with_gold)
        : chat_(chat), templates_(templates), with_gold_(with_gold) {}

    double score_step(const ScoreContext& ctx, const std::string& step_text,
                      Perspective perspective) override {
        Prompt p = build_prompt(ctx, step_text, perspective);
        JudgeResult r = judge_json(chat_, p, {"score"});
        last_rationale_ = r.record.value("rationale", "");
        return require_unit_score(r.record, "score");
    }

    const std::string& last_rationale() const { return last_rationale_; }

private:
    Prompt build_prompt(const ScoreContext& ctx, const std::string& step_text,
                        Perspective perspective) const {
        const LegalCase& c = *ctx.legal_case;
        switch (perspective) {
            case Perspective::Correctness:
                if (with_gold_)
                    return templates_.render("annotate_correctness",
                                             {{"facts", ctx.facts_text()},
                                              {"gold_reasoning", join(c.gold_reasoning, "\n")},
                                              {"step", step_text}});
                return templates_.render("judge_correctness",
                                         {{"facts", ctx.facts_text()}, {"step", step_text}});
            case Perspective::Progressiveness:
                if (with_gold_)
                    return templates_.render("annotate_progressiveness",
                                             {{"gold_reasoning", join(c.gold_reasoning, "\n")},
                                              {"judgments", join(c.gold_judgments, "\n")},
                                              {"steps", ctx.steps_text()},
                                              {"step", step_text}});
                return templates_.render("judge_progressiveness",
                                         {{"claim", c.claim},
                                          {"disputes", ctx.disputes_text()},
                                          {"steps", ctx.steps_text()},
                                          {"step", step_text}});
            case Perspective::Potential:
                return templates_.render("judge_potential", {{"claim", c.claim},
                                                             {"steps", ctx.steps_text()},
                                                             {"step", step_text}});
        }
        throw Error("unreachable perspective");
    }

    ChatBackend& chat_;
    const PromptLibrary& templates_;
    bool with_gold_;
    std::string last_rationale_;
};

/// OutcomeScorer backed by a judge prompt.
class JudgeOutcomeScorer : public OutcomeScorer {
public:
    JudgeOutcomeScorer(ChatBackend& chat, const PromptLibrary& templates)
        : chat_(chat), templates_(templates) {}

    double score_outcome(const LegalCase& c, const std::vector<std::string>& judgments,
                         int decision) override {
        Prompt p = templates_.render("outcome_score",
                                     {{"claim", c.claim},
                                      {"facts", join(c.facts, "\n")},
                                      {"judgments", join(judgments, "\n")},
                                      {"decision", decision == 1 ? "support" : "reject"}});
        JudgeResult r = judge_json(chat_, p, {"score"});
        return require_unit_score(r.record, "score");
    }

private:
    ChatBackend& chat_;
    const PromptLibrary& templates_;
};

/// ScoreBackend reading the score off a logprob-capable chat backend: the
/// probability mass on the configured positive tokens, renormalized over
/// positive ∪ negative. This is the configurable special-token extraction
/// rule for learned verifier heads.
struct LogprobScoreRule {
    std::vector<std::string> positive_tokens{"yes", "1"};
    std::vector<std::string> negative_tokens{"no", "0"};
};

class LogprobScoreBackend : public ScoreBackend {
public:
    using Rule = LogprobScoreRule;

    LogprobScoreBackend(ChatBackend& chat, const PromptLibrary& templates, Rule rule = Rule())
        : chat_(chat), templates_(templates), rule_(std::move(rule)) {
        if (!chat.supports_logprobs())
            throw ValidationError("backend does not expose logprobs", "backend");
    }

    double score_step(const ScoreContext& ctx, const std::string& step_text,
                      Perspective perspective) override {
        std::string name = perspective == Perspective::Correctness ? "judge_correctness"
                           : perspective == Perspective::Progressiveness
                               ? "judge_progressiveness"
                               : "judge_potential";
        Prompt p = templates_.render(
            name, perspective == Perspective::Correctness
                      ? std::map<std::string, std::string>{{"facts", ctx.facts_text()},
                                                           {"step", step_text}}
                      : std::map<std::string, std::string>{{"claim", ctx.legal_case->claim},
                                                           {"disputes", ctx.disputes_text()},
                                                           {"steps", ctx.steps_text()},
                                                           {"step", step_text}});
        TokenLogprobs lp = chat_.first_token_logprobs(p, {});
        double pos = 0.0, neg = 0.0;
        for (const auto& t : rule_.positive_tokens)
            if (auto it = lp.top_logprobs.find(t); it != lp.top_logprobs.end())
                pos += std::exp(it->second);
        for (const auto& t : rule_.negative_tokens)
            if (auto it = lp.top_logprobs.find(t); it != lp.top_logprobs.end())
                neg += std::exp(it->second);
        if (pos + neg <= 0.0)
            throw BackendError("no configured score tokens in logprobs", false);
        return pos / (pos + neg);
    }

private:
    ChatBackend& chat_;
    const PromptLibrary& templates_;
    Rule rule_;
};

} // namespace gavel
