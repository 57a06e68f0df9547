#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "gavel/errors.hpp"
#include "gavel/jsonl.hpp"

namespace gavel {

/// One court case as stored in the JSON-lines corpus. File keys follow the
/// published dataset schema (plaintiff_claim, facts, issues, court_reasoning,
/// judgment_decision, ...); see docs/formats.md for the full mapping.
struct LegalCase {
    std::string case_id;
    std::string plaintiff;
    std::string defendant;
    std::string claim;                       // plaintiff_claim
    std::vector<std::string> facts;          // facts
    std::string lawsuit_type;                // lawsuit_type
    std::vector<std::string> related_laws;   // related_laws
    std::vector<std::string> relevant_cases; // relevant_cases
    std::vector<std::string> gold_disputes;  // issues
    std::vector<std::string> gold_reasoning; // court_reasoning
    std::vector<std::string> gold_judgments; // judgment_decision
    int gold_decision = -1;                  // support&reject: 1 support, 0 reject, -1 absent
    json extra = json::object();             // unknown file fields, preserved on write

    bool has_decision() const { return gold_decision == 0 || gold_decision == 1; }

    void validate() const {
        if (case_id.empty()) throw ValidationError("case_id must be non-empty", "case_id");
        if (claim.empty()) throw ValidationError("claim must be non-empty", "claim");
        if (facts.empty()) throw ValidationError("facts must have at least one entry", "facts");
        if (gold_decision != -1 && gold_decision != 0 && gold_decision != 1)
            throw ValidationError("decision must be 0 or 1", "support&reject");
    }

    json to_json() const {
        json j = extra; // unknown fields first, known keys overwrite
        j["case_id"] = case_id;
        j["plaintiff"] = plaintiff;
        j["defendant"] = defendant;
        j["plaintiff_claim"] = claim;
        j["lawsuit_type"] = lawsuit_type;
        j["facts"] = facts;
        j["related_laws"] = related_laws;
        j["relevant_cases"] = relevant_cases;
        j["issues"] = gold_disputes;
        j["court_reasoning"] = gold_reasoning;
        j["judgment_decision"] = gold_judgments;
        if (has_decision()) j["support&reject"] = gold_decision == 1 ? "support" : "reject";
        return j;
    }

    static LegalCase from_json(const json& rec) {
        static const char* known[] = {
            "case_id",       "plaintiff",      "defendant",      "plaintiff_claim",
            "lawsuit_type",  "facts",          "related_laws",   "relevant_cases",
            "issues",        "court_reasoning", "judgment_decision", "support&reject",
            "gold_decision",
        };
        LegalCase c;
        c.case_id = require_string(rec, "case_id");
        c.plaintiff = rec.value("plaintiff", "");
        c.defendant = rec.value("defendant", "");
        c.claim = require_string(rec, "plaintiff_claim");
        c.lawsuit_type = rec.value("lawsuit_type", "");
        c.facts = string_list(rec, "facts");
        c.related_laws = string_list(rec, "related_laws");
        c.relevant_cases = string_list(rec, "relevant_cases");
        c.gold_disputes = string_list(rec, "issues");
        c.gold_reasoning = string_list(rec, "court_reasoning");
        c.gold_judgments = string_list(rec, "judgment_decision");
        if (rec.contains("support&reject")) {
            const json& v = rec["support&reject"];
            if (!v.is_string()) throw ValidationError("must be \"support\" or \"reject\"", "support&reject");
            std::string s = v.get<std::string>();
            if (s == "support") c.gold_decision = 1;
            else if (s == "reject") c.gold_decision = 0;
            else throw ValidationError("must be \"support\" or \"reject\", got \"" + s + "\"", "support&reject");
        } else if (rec.contains("gold_decision")) {
            const json& v = rec["gold_decision"];
            if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
                throw ValidationError("decision must be 0 or 1", "gold_decision");
            c.gold_decision = v.get<int>();
        }
        for (auto it = rec.begin(); it != rec.end(); ++it) {
            bool is_known = false;
            for (const char* k : known)
                if (it.key() == k) { is_known = true; break; }
            if (!is_known) c.extra[it.key()] = it.value();
        }
        c.validate();
        return c;
    }
};

inline bool operator==(const LegalCase& a, const LegalCase& b) {
    return a.to_json() == b.to_json();
}

/// Loads a JSON-lines corpus. Every record must pass the case invariants;
/// parse errors carry the line number; duplicate case ids are rejected.
inline std::vector<LegalCase> load_corpus(const std::string& path) {
    std::vector<LegalCase> cases;
    std::unordered_set<std::string> seen_ids;
    for_each_jsonl(path, [&](const json& rec, int lineno) {
        LegalCase c;
        try {
            c = LegalCase::from_json(rec);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")",
                                  e.field());
        }
        if (!seen_ids.insert(c.case_id).second)
            throw ValidationError("duplicate case_id \"" + c.case_id + "\" (line " +
                                      std::to_string(lineno) + ")",
                                  "case_id");
        cases.push_back(std::move(c));
    });
    return cases;
}

inline void save_corpus(const std::vector<LegalCase>& cases, const std::string& path) {
    for (const auto& c : cases) c.validate();
    JsonlWriter w(path);
    for (const auto& c : cases) w.write(c.to_json());
    w.close();
}

} // namespace gavel
