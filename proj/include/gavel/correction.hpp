#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gavel/arithmetic.hpp"
#include "gavel/backends.hpp"
#include "gavel/case_model.hpp"
#include "gavel/errors.hpp"
#include "gavel/money.hpp"
#include "gavel/prompts.hpp"
#include "gavel/retrieval.hpp"
#include "gavel/trace.hpp"
#include "gavel/util.hpp"
#include "gavel/verifier.hpp"

namespace gavel {

struct CorrectionConfig {
    int max_correction_attempts = 2;
    std::set<ErrorType> disabled; // ablation: these strategies fall back to plain reflection

    void validate() const {
        if (max_correction_attempts < 0)
            throw ValidationError("max_correction_attempts must be >= 0",
                                  "max_correction_attempts");
    }
};

struct CompensationComponent {
    std::string label;
    Money amount;
    std::string statute_ref;
    std::string formula;
};

struct CompensationBreakdown {
    std::vector<CompensationComponent> components;
    Money total;

    void validate() const {
        Money sum;
        for (const auto& c : components) {
            if (c.amount.cents < 0)
                throw ValidationError("component amount must be non-negative", c.label);
            sum = sum + c.amount;
        }
        if (sum != total)
            throw ValidationError("total " + format_money(total) +
                                      " does not equal component sum " + format_money(sum),
                                  "total");
    }

    // Numeric JSON amounts are in currency units; strings go through parse_money.
    static Money money_field(const json& v, const std::string& field) {
        if (v.is_string()) return parse_money(v.get<std::string>());
        if (v.is_number_integer()) return Money::from_units(v.get<int64_t>());
        if (v.is_number())
            return arith::to_money_half_up(arith::detail::rational_from_decimal(v.dump()));
        throw ValidationError("amount must be a number or string", field);
    }

    static CompensationBreakdown from_json(const json& j) {
        CompensationBreakdown b;
        if (!j.contains("components") || !j["components"].is_array())
            throw ValidationError("breakdown missing components list", "components");
        for (const auto& cj : j["components"]) {
            CompensationComponent c;
            c.label = cj.value("label", "");
            if (c.label.empty()) throw ValidationError("component missing label", "label");
            if (!cj.contains("amount"))
                throw ValidationError("component missing amount", c.label);
            c.amount = money_field(cj["amount"], c.label);
            c.statute_ref = cj.value("statute_ref", "");
            c.formula = cj.value("formula", "");
            b.components.push_back(std::move(c));
        }
        if (!j.contains("total")) throw ValidationError("breakdown missing total", "total");
        b.total = money_field(j["total"], "total");
        return b;
    }

    json to_json() const {
        json comps = json::array();
        for (const auto& c : components)
            comps.push_back(json{{"label", c.label},
                                 {"amount", format_money(c.amount)},
                                 {"statute_ref", c.statute_ref},
                                 {"formula", c.formula}});
        return json{{"components", comps}, {"total", format_money(total)}};
    }
};

struct CapRule {
    std::string statute_ref;
    Money cap;
};

struct CompensationViolation {
    enum class Kind { ValueMismatch, CapExceeded, UnparseableFormula, TotalMismatch };
    Kind kind;
    std::string component;
    Money expected;
    Money stated;
    std::string message;
};

inline std::string to_string(CompensationViolation::Kind k) {
    switch (k) {
        case CompensationViolation::Kind::ValueMismatch: return "value_mismatch";
        case CompensationViolation::Kind::CapExceeded: return "cap_exceeded";
        case CompensationViolation::Kind::UnparseableFormula: return "unparseable_formula";
        case CompensationViolation::Kind::TotalMismatch: return "total_mismatch";
    }
    return "?";
}

/// Validates every component formula against its stated amount (field
/// references resolve to the other components' stated amounts), checks
/// statutory caps, and reconciles the stated total with the component sum.
inline std::vector<CompensationViolation> check_compensation(
    const CompensationBreakdown& b, const std::vector<CapRule>& limits) {
    std::vector<CompensationViolation> out;
    std::map<std::string, Money> fields;
    for (const auto& c : b.components) fields[c.label] = c.amount;

    for (const auto& c : b.components) {
        if (!c.formula.empty()) {
            try {
                Money expected = arith::evaluate_money(c.formula, fields);
                if (expected != c.amount)
                    out.push_back({CompensationViolation::Kind::ValueMismatch, c.label, expected,
                                   c.amount,
                                   "component " + c.label + ": formula \"" + c.formula +
                                       "\" evaluates to " + format_money(expected) +
                                       ", stated " + format_money(c.amount)});
            } catch (const arith::FormulaError& e) {
                out.push_back({CompensationViolation::Kind::UnparseableFormula, c.label, Money{},
                               c.amount, "component " + c.label + ": " + e.what()});
            }
        }
        for (const auto& cap : limits)
            if (!cap.statute_ref.empty() && cap.statute_ref == c.statute_ref &&
                c.amount > cap.cap)
                out.push_back({CompensationViolation::Kind::CapExceeded, c.label, cap.cap,
                               c.amount,
                               "component " + c.label + ": amount " + format_money(c.amount) +
                                   " exceeds cap " + format_money(cap.cap) + " under " +
                                   cap.statute_ref});
    }

    Money sum;
    for (const auto& c : b.components) sum = sum + c.amount;
    if (sum != b.total)
        out.push_back({CompensationViolation::Kind::TotalMismatch, "total", sum, b.total,
                       "stated total " + format_money(b.total) +
                           " does not match component sum " + format_money(sum)});
    return out;
}

/// The fixed error-type → strategy routing table. Total and deterministic.
inline std::string strategy_name(ErrorType t) {
    switch (t) {
        case ErrorType::LegalPrincipleMisapplication: return "provision_retrieval";
        case ErrorType::FactsReasoningDiscrepancy: return "fact_tracking";
        case ErrorType::CompensationScopeError: return "compensation_validation";
        case ErrorType::UnenforceableJudgment: return "enforcement_review";
        case ErrorType::EvidenceChainError: return "evidence_tracing";
        case ErrorType::JointLiabilityError: return "liability_mapping";
        case ErrorType::UnaddressedKeyDispute: return "dispute_coverage";
        case ErrorType::SentencingBias: return "sentencing_benchmark";
    }
    return "?";
}

inline std::string error_type_description(ErrorType t) {
    switch (t) {
        case ErrorType::LegalPrincipleMisapplication:
            return "misreading legal constituent elements or applying the wrong standard";
        case ErrorType::FactsReasoningDiscrepancy:
            return "conclusions unsupported by or contradicting the case facts";
        case ErrorType::CompensationScopeError:
            return "wrong compensation amounts, overlooked items, or exceeded limits";
        case ErrorType::UnenforceableJudgment:
            return "an outcome that cannot be practically executed";
        case ErrorType::EvidenceChainError:
            return "flawed reliability or logical connection of the evidence relied on";
        case ErrorType::JointLiabilityError:
            return "wrong allocation of responsibility among multiple parties";
        case ErrorType::UnaddressedKeyDispute:
            return "a key dispute raised by the parties left unanalysed";
        case ErrorType::SentencingBias:
            return "a penalty deviating from comparable standards without justification";
    }
    return "?";
}

inline std::string error_type_catalog() {
    std::string out;
    for (ErrorType t : kAllErrorTypes)
        out += "- " + to_string(t) + ": " + error_type_description(t) + "\n";
    return out;
}

/// Everything correction strategies may use. Pointers are optional services;
/// a strategy whose required service is missing falls back to plain
/// reflection and marks the record degraded.
struct CorrectionServices {
    ChatBackend* chat = nullptr;
    const PromptLibrary* templates = nullptr;
    const StatuteTrie* statutes = nullptr;
    const CaseStore* precedents = nullptr;
    EmbeddingBackend* embedder = nullptr;
    std::vector<CapRule> caps;
    int fanout_cap = 3;
    std::function<StepVerification(const ReasoningStep&)> verify;
    ScoreContext context;
};

struct AttributionResult {
    ErrorType type;
    std::string evidence;
};

/// Classifies a flagged step into one of the eight types. A label outside the
/// enum triggers one re-prompt with the valid list, then an error.
inline AttributionResult attribute_error(const ScoreContext& ctx, const ReasoningStep& step,
                                         const StepVerification& v, ChatBackend& chat,
                                         const PromptLibrary& templates) {
    Prompt prompt = templates.render(
        "attribute_error",
        {{"error_types", error_type_catalog()},
         {"claim", ctx.legal_case ? ctx.legal_case->claim : ""},
         {"facts", ctx.facts_text()},
         {"steps", ctx.steps_text()},
         {"step", step.text},
         {"correctness", std::to_string(v.correctness)},
         {"progressiveness", std::to_string(v.progressiveness)},
         {"potential", std::to_string(v.potential)}});
    JudgeResult jr = judge_json(chat, prompt, {"error_type", "evidence"});
    std::string label = jr.record["error_type"].get<std::string>();
    if (auto t = parse_error_type(label))
        return {*t, jr.record.value("evidence", "")};

    Prompt retry = prompt;
    retry.text += "\nThe error_type must be exactly one of: ";
    for (size_t i = 0; i < std::size(kAllErrorTypes); ++i)
        retry.text += (i ? ", " : "") + to_string(kAllErrorTypes[i]);
    retry.text += ".";
    JudgeResult jr2 = judge_json(chat, retry, {"error_type", "evidence"});
    std::string label2 = jr2.record["error_type"].get<std::string>();
    if (auto t = parse_error_type(label2))
        return {*t, jr2.record.value("evidence", "")};
    throw Error("attribution returned unknown error type: \"" + label2 + "\"");
}

struct StrategyOutcome {
    std::vector<StrategyAction> actions;
    std::string revised;
    bool upheld = false;
    bool degraded = false;
};

namespace detail {

inline StrategyAction make_action(std::string kind, std::string detail,
                                  json data = json::object()) {
    return StrategyAction{std::move(kind), std::move(detail), std::move(data)};
}

inline std::pair<std::string, bool> revise_with(CorrectionServices& s,
                                                const std::string& template_name,
                                                const std::map<std::string, std::string>& vars) {
    Prompt p = s.templates->render(template_name, vars);
    JudgeResult jr = judge_json(*s.chat, p, {"revised_step"});
    return {trim(jr.record["revised_step"].get<std::string>()),
            jr.record.value("upheld", false)};
}

inline StrategyOutcome plain_reflection(const ReasoningStep& step, CorrectionServices& s,
                                        const std::string& problem) {
    StrategyOutcome out;
    auto [revised, upheld] =
        revise_with(s, "reflect",
                    {{"claim", s.context.legal_case ? s.context.legal_case->claim : ""},
                     {"facts", s.context.facts_text()},
                     {"step", step.text},
                     {"problem", problem}});
    out.actions.push_back(make_action("reflection", problem));
    out.revised = revised;
    out.upheld = upheld;
    return out;
}

inline StrategyOutcome degraded_reflection(const ReasoningStep& step, CorrectionServices& s,
                                           const std::string& problem,
                                           const std::string& note) {
    StrategyOutcome out = plain_reflection(step, s, problem);
    out.actions.insert(out.actions.begin(), make_action("note", note));
    out.degraded = true;
    return out;
}

inline std::string provisions_block(const std::vector<RetrievedProvision>& provisions) {
    if (provisions.empty()) return "none";
    std::string out;
    for (const auto& p : provisions) out += path_string(p.path) + ": " + p.text + "\n";
    return out;
}

/// Extracts money-looking amounts from free text (digit runs with optional
/// commas and decimals).
inline std::vector<Money> extract_amounts(const std::string& text) {
    std::vector<Money> out;
    size_t i = 0;
    while (i < text.size()) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        size_t start = i;
        while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) ||
                                   text[i] == ',' || text[i] == '.'))
            ++i;
        std::string token = text.substr(start, i - start);
        while (!token.empty() && (token.back() == '.' || token.back() == ','))
            token.pop_back();
        try {
            out.push_back(parse_money(token));
        } catch (const ValidationError&) {
        }
    }
    return out;
}

inline StrategyOutcome strategy_lp(const ReasoningStep& step, CorrectionServices& s) {
    if (!s.statutes || s.statutes->empty())
        return degraded_reflection(step, s, "legal principle misapplied",
                                   "statute catalog unavailable");
    StrategyOutcome out;
    std::vector<RetrievedProvision> provisions =
        retrieve_provisions(step.text, *s.statutes, *s.chat, *s.templates, s.fanout_cap);
    for (const auto& p : provisions)
        out.actions.push_back(
            make_action("retrieval", path_string(p.path), json{{"text", p.text}}));

    std::string precedents = "none";
    if (s.precedents && s.precedents->size() > 0 && s.embedder) {
        auto nearest = s.precedents->nearest(s.embedder->embed(step.text), 3);
        precedents.clear();
        for (const auto* e : nearest) {
            out.actions.push_back(make_action("retrieval", "precedent " + e->case_id));
            precedents += e->case_id + ": " + e->summary + "\n";
        }
    }

    auto [revised, upheld] = revise_with(s, "correct_lp",
                                         {{"provisions", provisions_block(provisions)},
                                          {"precedents", precedents},
                                          {"step", step.text}});
    out.actions.push_back(make_action("reflection", "rewrite against retrieved authorities"));
    out.revised = revised;
    out.upheld = upheld;
    return out;
}

inline StrategyOutcome strategy_fd(const ReasoningStep& step, CorrectionServices& s) {
    StrategyOutcome out;
    const auto& facts = s.context.legal_case->facts;

    struct Candidate {
        size_t index;
        double overlap;
    };
    std::vector<Candidate> candidates;
    for (size_t i = 0; i < facts.size(); ++i) {
        double o = token_overlap(facts[i], step.text);
        if (o >= 0.15) candidates.push_back({i, o});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.overlap > b.overlap; });
    if (candidates.size() > 3) candidates.resize(3);

    std::string linked, failed;
    if (candidates.empty()) {
        out.actions.push_back(make_action("fact_link", "no supporting fact found",
                                          json{{"confirmed", false}}));
        failed = "no fact in the record supports the step";
    } else {
        for (const auto& c : candidates) {
            const std::string& fact = facts[c.index];
            Prompt p = s.templates->render("fact_link", {{"fact", fact}, {"step", step.text}});
            JudgeResult jr = judge_json(*s.chat, p, {"supported"});
            bool supported = jr.record["supported"].is_boolean() &&
                             jr.record["supported"].get<bool>();
            out.actions.push_back(make_action(
                "fact_link", fact,
                json{{"confirmed", supported}, {"fact_index", c.index}}));
            (supported ? linked : failed) += "- " + fact + "\n";
        }
    }

    auto [revised, upheld] = revise_with(s, "correct_fd",
                                         {{"linked_facts", linked.empty() ? "none" : linked},
                                          {"failed_links", failed.empty() ? "none" : failed},
                                          {"step", step.text}});
    out.actions.push_back(make_action("reflection", "rewrite against tracked facts"));
    out.revised = revised;
    out.upheld = upheld;
    return out;
}

inline StrategyOutcome strategy_cs(const ReasoningStep& step, CorrectionServices& s) {
    Prompt extract = s.templates->render(
        "extract_breakdown",
        {{"claim", s.context.legal_case->claim}, {"step", step.text}});
    CompensationBreakdown breakdown;
    try {
        JudgeResult jr = judge_json(*s.chat, extract, {"components", "total"});
        breakdown = CompensationBreakdown::from_json(jr.record);
    } catch (const Error& e) {
        return degraded_reflection(step, s, "compensation amounts unverifiable",
                                   std::string("breakdown extraction failed: ") + e.what());
    }

    StrategyOutcome out;
    std::map<std::string, Money> fields;
    for (const auto& c : breakdown.components) fields[c.label] = c.amount;

    std::vector<CompensationViolation> violations = check_compensation(breakdown, s.caps);

    Money corrected_total;
    std::string components_text;
    for (const auto& c : breakdown.components) {
        Money corrected = c.amount;
        std::string shown = c.formula.empty() ? format_money(c.amount) : c.formula;
        json data{{"stated", format_money(c.amount)}};
        if (!c.formula.empty()) {
            try {
                corrected = arith::evaluate_money(c.formula, fields);
                data["expected"] = format_money(corrected);
            } catch (const arith::FormulaError&) {
                corrected = c.amount;
            }
        }
        out.actions.push_back(make_action("calculation", c.label + " = " + shown, data));
        corrected_total = corrected_total + corrected;
        components_text += c.label + ": " + format_money(corrected) +
                           (c.statute_ref.empty() ? "" : " (" + c.statute_ref + ")") + "\n";
    }
    std::string violations_text;
    for (const auto& v : violations) {
        out.actions.push_back(
            make_action("calculation", v.message, json{{"kind", to_string(v.kind)}}));
        violations_text += "- " + v.message + "\n";
    }

    auto [revised, upheld] =
        revise_with(s, "correct_cs",
                    {{"violations", violations_text.empty() ? "none" : violations_text},
                     {"components", components_text},
                     {"corrected_total", format_money(corrected_total)},
                     {"step", step.text}});
    out.actions.push_back(make_action("reflection", "rewrite with validated figures"));
    out.revised = revised;
    out.upheld = upheld;
    return out;
}

inline StrategyOutcome strategy_ue(const ReasoningStep& step, CorrectionServices& s) {
    StrategyOutcome out;
    std::string provisions = "none";
    if (s.statutes && !s.statutes->empty()) {
        auto retrieved = retrieve_provisions(step.text + " enforcement execution", *s.statutes,
                                             *s.chat, *s.templates, s.fanout_cap);
        for (const auto& p : retrieved)
            out.actions.push_back(
                make_action("retrieval", path_string(p.path), json{{"text", p.text}}));
        provisions = provisions_block(retrieved);
    }
    auto [revised, upheld] =
        revise_with(s, "correct_ue", {{"provisions", provisions}, {"step", step.text}});
    out.actions.push_back(make_action("reflection", "feasibility review"));
    out.revised = revised;
    out.upheld = upheld;
    return out;
}

inline StrategyOutcome strategy_ec(const ReasoningStep& step, CorrectionServices& s) {
    StrategyOutcome out;
    Prompt review = s.templates->render(
        "evidence_review", {{"facts", s.context.facts_text()}, {"step", step.text}});
    JudgeResult jr = judge_json(*s.chat, review, {"evidence", "issues"});
    std::string evidence_text, issues_text;
    for (const auto& e : jr.record["evidence"])
        if (e.is_string()) {
            out.actions.push_back(make_action("evidence", e.get<std::string>()));
            evidence_text += "- " + e.get<std::string>() + "\n";
        }
    for (const auto& i : jr.record["issues"])
        if (i.is_string()) {
            out.actions.push_back(make_action("note", i.get<std::string>()));
            issues_text += "- " + i.get<std::string>() + "\n";
        }
    auto [revised, upheld] =
        revise_with(s, "correct_ec",
                    {{"evidence", evidence_text.empty() ? "none" : evidence_text},
                     {"issues", issues_text.empty() ? "none" : issues_text},
                     {"step", step.text}});
    out.actions.push_back(make_action("reflection", "rebuild evidence chain"));
    out.revised = revised;
    out.upheld = upheld;
    return out;
}

inline StrategyOutcome strategy_jl(const ReasoningStep& step, CorrectionServices& s) {
    StrategyOutcome out;
    std::string provisions = "none";
    if (s.statutes && !s.statutes->empty()) {
        auto retrieved = retrieve_provisions(step.text + " joint liability", *s.statutes,
                                             *s.chat, *s.templates, s.fanout_cap);
        for (const auto& p : retrieved)
            out.actions.push_back(
                make_action("retrieval", path_string(p.path), json{{"text", p.text}}));
        provisions = provisions_block(retrieved);
    }
    Prompt map_prompt = s.templates->render("party_map",
                                            {{"claim", s.context.legal_case->claim},
                                             {"facts", s.context.facts_text()},
                                             {"step", step.text}});
    JudgeResult jr = judge_json(*s.chat, map_prompt, {"relationships"});
    std::string relationships = jr.record["relationships"].is_string()
                                    ? jr.record["relationships"].get<std::string>()
                                    : jr.record["relationships"].dump();
    out.actions.push_back(
        make_action("note", "party relationship map", json{{"relationships", relationships}}));

    auto [revised, upheld] = revise_with(s, "correct_jl",
                                         {{"provisions", provisions},
                                          {"relationships", relationships},
                                          {"step", step.text}});
    out.actions.push_back(make_action("reflection", "realign liability distribution"));
    out.revised = revised;
    out.upheld = upheld;
    return out;
}

inline StrategyOutcome strategy_kd(const ReasoningStep& step, CorrectionServices& s) {
    StrategyOutcome out;
    Prompt coverage = s.templates->render("dispute_coverage",
                                          {{"disputes", s.context.disputes_text()},
                                           {"steps", s.context.steps_text()},
                                           {"step", step.text}});
    JudgeResult jr = judge_json(*s.chat, coverage, {"missing"});
    std::string missing_text;
    for (const auto& m : jr.record["missing"])
        if (m.is_string()) {
            out.actions.push_back(make_action("note", "unaddressed: " + m.get<std::string>()));
            missing_text += "- " + m.get<std::string>() + "\n";
        }
    if (missing_text.empty()) {
        out.actions.push_back(make_action("note", "all disputes addressed"));
        out.revised = step.text;
        out.upheld = true;
        return out;
    }
    auto [revised, upheld] =
        revise_with(s, "correct_kd", {{"missing", missing_text}, {"step", step.text}});
    out.actions.push_back(make_action("reflection", "cover unaddressed disputes"));
    out.revised = revised;
    out.upheld = upheld;
    return out;
}

inline StrategyOutcome strategy_sb(const ReasoningStep& step, CorrectionServices& s) {
    if (!s.precedents || !s.embedder || s.precedents->size() < 3)
        return degraded_reflection(step, s, "penalty may deviate from comparable cases",
                                   "fewer than 3 precedents available");
    StrategyOutcome out;
    auto nearest = s.precedents->nearest(s.embedder->embed(step.text), 3);
    std::vector<Money> pool;
    std::string benchmark;
    for (const auto* e : nearest) {
        out.actions.push_back(make_action("retrieval", "precedent " + e->case_id));
        for (Money m : extract_amounts(e->summary)) pool.push_back(m);
        benchmark += e->case_id + ": " + e->summary + "\n";
    }
    std::vector<Money> stated = extract_amounts(step.text);
    json data{{"stated", json::array()}};
    for (Money m : stated) data["stated"].push_back(format_money(m));
    std::string range_text = "no penalty amounts found in precedents";
    if (!pool.empty()) {
        Money low = *std::min_element(pool.begin(), pool.end());
        Money high = *std::max_element(pool.begin(), pool.end());
        data["low"] = format_money(low);
        data["high"] = format_money(high);
        bool outlier = false;
        for (Money m : stated)
            if (m < low || m > high) outlier = true;
        data["outlier"] = outlier;
        range_text = "precedent penalty range " + format_money(low) + " to " +
                     format_money(high) + (outlier ? "; stated penalty falls outside" : "");
    }
    out.actions.push_back(make_action("benchmark", range_text, data));
    benchmark += range_text + "\n";

    auto [revised, upheld] =
        revise_with(s, "correct_sb", {{"benchmark", benchmark}, {"step", step.text}});
    out.actions.push_back(make_action("reflection", "align penalty with benchmark"));
    out.revised = revised;
    out.upheld = upheld;
    return out;
}

} // namespace detail

/// Dispatches the strategy for an error type. Disabled types run plain
/// reflection instead, leaving the other strategies intact.
inline StrategyOutcome run_strategy(ErrorType type, const ReasoningStep& step,
                                    CorrectionServices& services,
                                    const CorrectionConfig& config) {
    if (config.disabled.count(type))
        return detail::plain_reflection(step, services,
                                        "plain reflection (strategy disabled): " +
                                            error_type_description(type));
    switch (type) {
        case ErrorType::LegalPrincipleMisapplication: return detail::strategy_lp(step, services);
        case ErrorType::FactsReasoningDiscrepancy: return detail::strategy_fd(step, services);
        case ErrorType::CompensationScopeError: return detail::strategy_cs(step, services);
        case ErrorType::UnenforceableJudgment: return detail::strategy_ue(step, services);
        case ErrorType::EvidenceChainError: return detail::strategy_ec(step, services);
        case ErrorType::JointLiabilityError: return detail::strategy_jl(step, services);
        case ErrorType::UnaddressedKeyDispute: return detail::strategy_kd(step, services);
        case ErrorType::SentencingBias: return detail::strategy_sb(step, services);
    }
    throw Error("unreachable error type");
}

/// Runs one correction attempt: strategy, then re-verification of the revised
/// step. The strategy trace records every retrieval, link, and calculation.
inline CorrectionRecord correct_step(const ReasoningStep& step, ErrorType type,
                                     const std::string& evidence, int attempt,
                                     CorrectionServices& services,
                                     const CorrectionConfig& config) {
    StrategyOutcome outcome = run_strategy(type, step, services, config);
    if (outcome.revised.empty()) {
        outcome.revised = step.text;
        outcome.upheld = true;
    }
    CorrectionRecord record;
    record.attempt = attempt;
    record.error_type = type;
    record.evidence = evidence;
    record.strategy_trace = std::move(outcome.actions);
    record.revised_step = outcome.revised;
    record.upheld = outcome.upheld;
    record.degraded = outcome.degraded;

    ReasoningStep candidate;
    candidate.index = step.index;
    candidate.text = record.revised_step;
    record.re_verification = services.verify(candidate);
    return record;
}

/// Attribute → correct → re-verify, up to max_correction_attempts. Returns
/// the first revision that passes the gate; otherwise the revision with the
/// highest aggregate, marked unresolved. Re-attribution runs from scratch on
/// each attempt's current text.
inline ReasoningStep correction_loop(const ReasoningStep& original,
                                     const StepVerification& verification,
                                     CorrectionServices& services,
                                     const CorrectionConfig& config) {
    config.validate();
    ReasoningStep result = original;
    if (config.max_correction_attempts == 0) {
        result.unresolved = true;
        return result;
    }

    ReasoningStep current = original;
    StepVerification current_ver = verification;
    for (int attempt = 1; attempt <= config.max_correction_attempts; ++attempt) {
        AttributionResult attr =
            attribute_error(services.context, current, current_ver, *services.chat,
                            *services.templates);
        CorrectionRecord record =
            correct_step(current, attr.type, attr.evidence, attempt, services, config);
        result.corrections.push_back(record);
        if (!record.re_verification.flagged) {
            result.text = record.revised_step;
            result.verification = record.re_verification;
            result.unresolved = false;
            return result;
        }
        current.text = record.revised_step;
        current_ver = record.re_verification;
    }

    const CorrectionRecord* best = &result.corrections.front();
    for (const auto& r : result.corrections)
        if (r.re_verification.aggregate > best->re_verification.aggregate) best = &r;
    result.text = best->revised_step;
    result.verification = best->re_verification;
    result.unresolved = true;
    return result;
}

} // namespace gavel
