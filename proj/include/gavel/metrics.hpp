#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "gavel/backends.hpp"
#include "gavel/errors.hpp"
#include "gavel/jsonl.hpp"
#include "gavel/money.hpp"
#include "gavel/prompts.hpp"

namespace gavel {

struct PredictionRecord {
    std::string case_id;
    int predicted_decision = 0;
    std::vector<std::string> predicted_judgments;
    int gold_decision = 0;
    std::vector<std::string> gold_judgments;

    void validate() const {
        if (case_id.empty()) throw ValidationError("case_id must be non-empty", "case_id");
        for (int d : {predicted_decision, gold_decision})
            if (d != 0 && d != 1) throw ValidationError("decision must be 0 or 1", "decision");
    }

    json to_json() const {
        return json{{"case_id", case_id},
                    {"decision", predicted_decision},
                    {"judgments", predicted_judgments}};
    }
};

struct ConfusionCounts {
    int tp = 0, fp = 0, tn = 0, fn = 0;
    int total() const { return tp + fp + tn + fn; }
};

struct CaseLevelResult {
    double cl_acc = 0.0;
    double cl_f1 = 0.0;
    ConfusionCounts counts;
    bool f1_zero_denominator = false;
};

/// Binary support/reject agreement. Positive class is decision 1 (support);
/// an empty F1 denominator yields 0 with the warning flag set.
inline CaseLevelResult case_level(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw ValidationError("need at least one record", "records");
    CaseLevelResult r;
    for (const auto& rec : records) {
        rec.validate();
        if (rec.predicted_decision == 1)
            (rec.gold_decision == 1 ? r.counts.tp : r.counts.fp)++;
        else
            (rec.gold_decision == 0 ? r.counts.tn : r.counts.fn)++;
    }
    r.cl_acc = static_cast<double>(r.counts.tp + r.counts.tn) / r.counts.total();
    int denom = 2 * r.counts.tp + r.counts.fp + r.counts.fn;
    if (denom == 0) {
        r.cl_f1 = 0.0;
        r.f1_zero_denominator = true;
    } else {
        r.cl_f1 = 2.0 * r.counts.tp / denom;
    }
    return r;
}

struct ElementCaseDetail {
    std::string case_id;
    std::vector<std::string> gold_elements;
    std::vector<std::string> predicted_elements;
    std::vector<bool> covered; // per gold element
    std::vector<bool> correct; // per predicted element
    bool excluded = false;
    std::string exclusion_reason;

    json to_json() const {
        json j{{"case_id", case_id},
               {"gold_elements", gold_elements},
               {"predicted_elements", predicted_elements}};
        j["covered"] = covered;
        j["correct"] = correct;
        if (excluded) {
            j["excluded"] = true;
            j["exclusion_reason"] = exclusion_reason;
        }
        return j;
    }
};

struct ElementLevelResult {
    double e_cov = 0.0;
    double e_pre = 0.0;
    size_t matched_gold = 0, total_gold = 0;
    size_t correct_predicted = 0, total_predicted = 0;
    std::vector<ElementCaseDetail> details;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::string> decompose_elements(ChatBackend& judge,
                                                   const PromptLibrary& templates,
                                                   const std::vector<std::string>& judgments) {
    Prompt p = templates.render("decompose_elements", {{"judgments", join(judgments, "\n")}});
    JudgeResult r = judge_json(judge, p, {"elements"});
    std::vector<std::string> out;
    for (const auto& e : r.record.at("elements"))
        if (e.is_string()) out.push_back(e.get<std::string>());
    return out;
}

inline std::vector<bool> bool_list(const json& rec, const std::string& key, size_t expected) {
    std::vector<bool> out;
    for (const auto& b : rec.at(key)) {
        if (!b.is_boolean()) throw BackendError("judge returned non-boolean in " + key, false);
        out.push_back(b.get<bool>());
    }
    if (out.size() != expected)
        throw BackendError("judge returned " + std::to_string(out.size()) + " entries for " +
                               key + ", expected " + std::to_string(expected),
                           false);
    return out;
}

} // namespace detail

/// Element coverage and precision, micro-averaged over the pooled elements of
/// all cases. Gold and predicted judgments are decomposed into atomic
/// elements by a judge prompt, then a second prompt marks per-element
/// coverage/correctness. A judge failure excludes the case and reports it.
inline ElementLevelResult element_level(const std::vector<PredictionRecord>& records,
                                        ChatBackend& judge, const PromptLibrary& templates) {
    std::vector<PredictionRecord> sorted(records);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.case_id < b.case_id; });

    ElementLevelResult result;
    for (const auto& rec : sorted) {
        rec.validate();
        ElementCaseDetail d;
        d.case_id = rec.case_id;
        try {
            d.gold_elements = detail::decompose_elements(judge, templates, rec.gold_judgments);
            if (rec.predicted_judgments.empty()) {
                result.warnings.push_back("case " + rec.case_id + ": empty prediction");
                d.covered.assign(d.gold_elements.size(), false);
            } else {
                d.predicted_elements =
                    detail::decompose_elements(judge, templates, rec.predicted_judgments);
                Prompt p = templates.render(
                    "assess_elements",
                    {{"gold_elements", join(d.gold_elements, "\n")},
                     {"predicted_elements", join(d.predicted_elements, "\n")}});
                JudgeResult jr = judge_json(judge, p, {"covered", "correct"});
                d.covered = detail::bool_list(jr.record, "covered", d.gold_elements.size());
                d.correct = detail::bool_list(jr.record, "correct", d.predicted_elements.size());
            }
        } catch (const Error& e) {
            d.excluded = true;
            d.exclusion_reason = e.what();
            result.warnings.push_back("case " + rec.case_id + " excluded: " + e.what());
            result.details.push_back(std::move(d));
            continue;
        }
        result.total_gold += d.gold_elements.size();
        result.total_predicted += d.predicted_elements.size();
        for (bool b : d.covered) result.matched_gold += b ? 1 : 0;
        for (bool b : d.correct) result.correct_predicted += b ? 1 : 0;
        result.details.push_back(std::move(d));
    }

    if (result.total_gold == 0) {
        result.warnings.push_back("no gold elements; E-Cov defined as 0");
        result.e_cov = 0.0;
    } else {
        result.e_cov = static_cast<double>(result.matched_gold) / result.total_gold;
    }
    if (result.total_predicted == 0) {
        result.warnings.push_back("no predicted elements; E-Pre defined as 0");
        result.e_pre = 0.0;
    } else {
        result.e_pre = static_cast<double>(result.correct_predicted) / result.total_predicted;
    }
    return result;
}

/// Order-of-magnitude equality on fine amounts: the power-of-ten bracket of
/// both (positive) amounts must match. Both zero is a match, exactly one zero
/// is not. Computed on integer cents, which shifts both brackets equally.
inline bool fine_amount_match(Money predicted, Money gold) {
    if (predicted.cents < 0 || gold.cents < 0)
        throw ValidationError("fine amounts must be non-negative", "amount");
    if (predicted.cents == 0 && gold.cents == 0) return true;
    if (predicted.cents == 0 || gold.cents == 0) return false;
    auto digits = [](int64_t v) {
        int n = 0;
        while (v > 0) {
            ++n;
            v /= 10;
        }
        return n;
    };
    return digits(predicted.cents) == digits(gold.cents);
}

struct MetricsReport {
    CaseLevelResult case_level;
    ElementLevelResult element_level;

    json to_json() const {
        return json{{"cl_acc", case_level.cl_acc},
                    {"cl_f1", case_level.cl_f1},
                    {"e_cov", element_level.e_cov},
                    {"e_pre", element_level.e_pre},
                    {"counts",
                     {{"tp", case_level.counts.tp},
                      {"fp", case_level.counts.fp},
                      {"tn", case_level.counts.tn},
                      {"fn", case_level.counts.fn},
                      {"matched_gold", element_level.matched_gold},
                      {"total_gold", element_level.total_gold},
                      {"correct_predicted", element_level.correct_predicted},
                      {"total_predicted", element_level.total_predicted}}},
                    {"f1_zero_denominator", case_level.f1_zero_denominator}};
    }
};

} // namespace gavel
