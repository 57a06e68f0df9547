#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "gavel/errors.hpp"
#include "gavel/util.hpp"

namespace gavel {

/// A rendered prompt. `template_id` is "<name>@<version>" so every trace can
/// record exactly which template produced it.
struct Prompt {
    std::string template_id;
    std::string text;

    /// Stable key for scripted-response lookup.
    std::string fingerprint() const {
        return template_id + ":" + to_hex(fnv1a64(text));
    }
};

/// Named plain-text templates with {{placeholder}} substitution. The default
/// set is compiled in as version "v1"; a directory of .txt files (directory
/// basename = version) can replace it wholesale via load_dir().
class PromptLibrary {
public:
    static PromptLibrary builtin();

    static PromptLibrary load_dir(const std::string& dir) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(dir)) throw IoError("template directory not found", dir);
        PromptLibrary lib;
        lib.version_ = fs::path(dir).filename().string();
        if (lib.version_.empty()) lib.version_ = fs::path(dir).parent_path().filename().string();
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() != ".txt") continue;
            std::ifstream in(entry.path());
            if (!in) throw IoError("cannot read template", entry.path().string());
            std::stringstream ss;
            ss << in.rdbuf();
            lib.templates_[entry.path().stem().string()] = ss.str();
        }
        if (lib.templates_.empty()) throw IoError("no .txt templates in directory", dir);
        return lib;
    }

    const std::string& version() const { return version_; }
    bool has(const std::string& name) const { return templates_.count(name) > 0; }

    const std::string& raw(const std::string& name) const {
        auto it = templates_.find(name);
        if (it == templates_.end()) throw Error("unknown prompt template: " + name);
        return it->second;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [k, _] : templates_) out.push_back(k);
        return out;
    }

    Prompt render(const std::string& name,
                  const std::map<std::string, std::string>& vars) const {
        std::string body = raw(name);
        std::string out;
        out.reserve(body.size());
        size_t i = 0;
        while (i < body.size()) {
            size_t open = body.find("{{", i);
            if (open == std::string::npos) {
                out += body.substr(i);
                break;
            }
            out += body.substr(i, open - i);
            size_t close = body.find("}}", open);
            if (close == std::string::npos)
                throw Error("unterminated placeholder in template " + name);
            std::string key = body.substr(open + 2, close - open - 2);
            auto it = vars.find(key);
            if (it == vars.end())
                throw Error("unresolved placeholder {{" + key + "}} in template " + name);
            out += it->second;
            i = close + 2;
        }
        return Prompt{name + "@" + version_, out};
    }

    void set(const std::string& name, std::string body) {
        templates_[name] = std::move(body);
    }

private:
    std::string version_ = "v1";
    std::map<std::string, std::string> templates_;
};

namespace detail {

inline std::map<std::string, std::string> builtin_templates_v1() {
    std::map<std::string, std::string> t;

    t["disputes"] =
        "You are analysing a court case. Generate the disputes about the plaintiff claim "
        "based on the facts. Disputes are the questions one party affirms and the other "
        "denies; they are vital to determine whether the court supports or rejects the "
        "application.\n\n"
        "plaintiff_claim: {{claim}}\n"
        "facts:\n{{facts}}\n\n"
        "Return a JSON object: {\"disputes\": [\"...\"]}\n";

    t["step"] =
        "You are performing step-wise judicial reasoning for a court case.\n\n"
        "plaintiff_claim: {{claim}}\n"
        "facts:\n{{facts}}\n"
        "disputes:\n{{disputes}}\n"
        "reasoning so far:\n{{steps}}\n\n"
        "Write the single next reasoning step as plain text. Each step must address the "
        "disputes and move toward a judgment. When the analysis is complete, instead of "
        "a step, output the line:\n"
        "{{finalize_marker}} {\"judgments\": [\"...\"], \"decision\": \"support|reject\"}\n";

    t["finalize"] =
        "The reasoning below must now be concluded.\n\n"
        "plaintiff_claim: {{claim}}\n"
        "disputes:\n{{disputes}}\n"
        "reasoning so far:\n{{steps}}\n\n"
        "Output exactly one line:\n"
        "{{finalize_marker}} {\"judgments\": [\"...\"], \"decision\": \"support|reject\"}\n";

    t["rollout"] =
        "Complete the remaining judicial reasoning for this case in one response.\n\n"
        "plaintiff_claim: {{claim}}\n"
        "facts:\n{{facts}}\n"
        "disputes:\n{{disputes}}\n"
        "reasoning so far:\n{{steps}}\n\n"
        "Continue with any remaining steps, then end with the line:\n"
        "{{finalize_marker}} {\"judgments\": [\"...\"], \"decision\": \"support|reject\"}\n";

    t["judge_correctness"] =
        "Rate the reasoning step below for correctness: does it align with the facts of "
        "the case and follow proper legal logic without contradicting established "
        "evidence?\n\n"
        "facts:\n{{facts}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"score\": <0..1>, \"rationale\": \"...\"}\n";

    t["judge_progressiveness"] =
        "Rate the reasoning step below for progressiveness: how effectively does it "
        "advance the reasoning toward the final judgment?\n\n"
        "claim: {{claim}}\n"
        "disputes:\n{{disputes}}\n"
        "reasoning so far:\n{{steps}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"score\": <0..1>, \"rationale\": \"...\"}\n";

    t["judge_potential"] =
        "Estimate the probability that continuing from the reasoning prefix below leads "
        "to the correct final decision.\n\n"
        "claim: {{claim}}\n"
        "reasoning so far:\n{{steps}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"score\": <0..1>, \"rationale\": \"...\"}\n";

    t["annotate_correctness"] =
        "Compare the candidate reasoning step against the case facts and the court's own "
        "reasoning. Rate its correctness: alignment with the facts and proper legal "
        "logic, without contradicting established evidence.\n\n"
        "facts:\n{{facts}}\n"
        "court_reasoning:\n{{gold_reasoning}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"score\": <0..1>, \"rationale\": \"...\"}\n";

    t["annotate_progressiveness"] =
        "Compare the candidate reasoning step against the court's own reasoning and the "
        "final judgment. Rate how effectively it advances toward that judgment.\n\n"
        "court_reasoning:\n{{gold_reasoning}}\n"
        "judgment:\n{{judgments}}\n"
        "reasoning so far:\n{{steps}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"score\": <0..1>, \"rationale\": \"...\"}\n";

    t["synthesize_negative"] =
        "Rewrite the court reasoning step below so that it exhibits the following legal "
        "reasoning error: {{error_type}} — {{error_description}}. Keep the topic and "
        "parties unchanged; introduce only that error.\n\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"step\": \"...\"}\n";

    t["attribute_error"] =
        "A reasoning step was flagged as erroneous. Classify the error into exactly one "
        "of these types:\n{{error_types}}\n\n"
        "claim: {{claim}}\n"
        "facts:\n{{facts}}\n"
        "reasoning so far:\n{{steps}}\n"
        "flagged step: {{step}}\n"
        "scores: correctness={{correctness}} progressiveness={{progressiveness}} "
        "potential={{potential}}\n\n"
        "Return JSON: {\"error_type\": \"<type name>\", \"evidence\": \"<one-paragraph "
        "rationale>\"}\n";

    t["reflect"] =
        "Revise the reasoning step below to fix the identified problem. If the step is "
        "actually correct as written, return it unchanged and set \"upheld\" true.\n\n"
        "claim: {{claim}}\n"
        "facts:\n{{facts}}\n"
        "step: {{step}}\n"
        "problem: {{problem}}\n\n"
        "Return JSON: {\"revised_step\": \"...\", \"upheld\": false}\n";

    t["extract_breakdown"] =
        "Decompose the compensation discussed in the reasoning step into atomic "
        "components. For each component give a short label, the stated amount, the "
        "statute it rests on, and the arithmetic formula that produces it (numbers, "
        "other component labels, + - * / min max).\n\n"
        "claim: {{claim}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"components\": [{\"label\": \"...\", \"amount\": \"...\", "
        "\"statute_ref\": \"...\", \"formula\": \"...\"}], \"total\": \"...\"}\n";

    t["correct_lp"] =
        "The step below misapplies a legal principle. Using the retrieved provisions and "
        "precedents, verify each constituent element and rewrite the step so it states "
        "the correct legal standard and its application to the facts.\n\n"
        "provisions:\n{{provisions}}\n"
        "precedents:\n{{precedents}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"revised_step\": \"...\", \"upheld\": false}\n";

    t["fact_link"] =
        "Does the case fact below support the assertion made in the reasoning step?\n\n"
        "fact: {{fact}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"supported\": true}\n";

    t["correct_fd"] =
        "The step below is not supported by the case facts. Rewrite it so every assertion "
        "is backed by one of the tracked facts; drop assertions with no factual basis.\n\n"
        "tracked facts (confirmed support):\n{{linked_facts}}\n"
        "failed links:\n{{failed_links}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"revised_step\": \"...\", \"upheld\": false}\n";

    t["correct_cs"] =
        "The compensation reasoning below contains calculation problems. Rewrite the step "
        "using the validated figures.\n\n"
        "violations:\n{{violations}}\n"
        "validated components:\n{{components}}\n"
        "validated total: {{corrected_total}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"revised_step\": \"...\", \"upheld\": false}\n";

    t["correct_ue"] =
        "The judgment proposed in the step below may be impossible to execute. Review the "
        "enforcement provisions, assess practical feasibility, and rewrite the step so "
        "the outcome can actually be enforced while preserving its legal intent.\n\n"
        "enforcement provisions:\n{{provisions}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"revised_step\": \"...\", \"upheld\": false}\n";

    t["evidence_review"] =
        "Trace each piece of evidence relied on by the reasoning step. For each item, "
        "assess reliability, relevance, and logical connection to the conclusion. List "
        "every weakness found.\n\n"
        "facts:\n{{facts}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"evidence\": [\"...\"], \"issues\": [\"...\"]}\n";

    t["correct_ec"] =
        "The evidence analysis in the step below is flawed. Rewrite it so each conclusion "
        "follows from a sound, connected chain of the listed evidence.\n\n"
        "evidence trace:\n{{evidence}}\n"
        "issues found:\n{{issues}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"revised_step\": \"...\", \"upheld\": false}\n";

    t["party_map"] =
        "Map the relationships between the parties mentioned below: roles, duties, and "
        "how responsibility flows between them.\n\n"
        "claim: {{claim}}\n"
        "facts:\n{{facts}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"relationships\": \"...\"}\n";

    t["correct_jl"] =
        "The allocation of liability among parties in the step below is incorrect. Using "
        "the joint-liability provisions and the relationship map, rewrite the step so "
        "responsibility is distributed consistently with the law and the facts.\n\n"
        "provisions:\n{{provisions}}\n"
        "relationship map: {{relationships}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"revised_step\": \"...\", \"upheld\": false}\n";

    t["dispute_coverage"] =
        "Check which of the case disputes are addressed by the reasoning so far and the "
        "current step. List the disputes that remain unaddressed.\n\n"
        "disputes:\n{{disputes}}\n"
        "reasoning so far:\n{{steps}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"missing\": [\"...\"]}\n";

    t["correct_kd"] =
        "The step below overlooks key disputes. Rewrite it so the listed unaddressed "
        "disputes receive proper analysis.\n\n"
        "unaddressed disputes:\n{{missing}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"revised_step\": \"...\", \"upheld\": false}\n";

    t["correct_sb"] =
        "The penalty stated in the step below deviates from comparable cases without "
        "justification. Using the precedent benchmark, rewrite the step so the penalty "
        "aligns with the benchmark range or states explicit aggravating/mitigating "
        "grounds.\n\n"
        "precedent benchmark:\n{{benchmark}}\n"
        "step: {{step}}\n\n"
        "Return JSON: {\"revised_step\": \"...\", \"upheld\": false}\n";

    t["provision_select"] =
        "You are narrowing a statute catalogue to answer a query. At the {{level}} level, "
        "select the entries relevant to the query (at most {{fanout_cap}}).\n\n"
        "query: {{query}}\n"
        "OPTIONS:\n{{children}}\n\n"
        "Return JSON: {\"selected\": [\"<entry name>\"]}\n";

    t["rerank"] =
        "Order the candidate precedents below from most to least relevant to the query.\n\n"
        "query: {{query}}\n"
        "candidates:\n{{candidates}}\n\n"
        "Return JSON: {\"ranking\": [\"<case_id>\"]}\n";

    t["summarize_case"] =
        "Summarize the precedent below in 2-3 sentences focused on what it decides and "
        "the standard it applies.\n\n"
        "{{summary}}\n";

    t["outcome_score"] =
        "Rate how well the predicted judgment below fits the case. Consider whether the "
        "judgments follow from the claim and facts and whether the decision is "
        "defensible.\n\n"
        "claim: {{claim}}\n"
        "facts:\n{{facts}}\n"
        "predicted judgments:\n{{judgments}}\n"
        "predicted decision: {{decision}}\n\n"
        "Return JSON: {\"score\": <0..1>}\n";

    t["decompose_elements"] =
        "Decompose the judgment items below into atomic judgment elements (one ruling, "
        "order, or amount per element).\n\n"
        "judgments:\n{{judgments}}\n\n"
        "Return JSON: {\"elements\": [\"...\"]}\n";

    t["assess_elements"] =
        "Given the gold judgment elements and the predicted judgment elements, report "
        "which gold elements are covered by the prediction and which predicted elements "
        "are correct under the gold ruling. Fine amounts count as correct when they match "
        "the true amount's order of magnitude.\n\n"
        "gold elements:\n{{gold_elements}}\n"
        "predicted elements:\n{{predicted_elements}}\n\n"
        "Return JSON: {\"covered\": [true,...], \"correct\": [true,...]} with one boolean "
        "per gold/predicted element respectively.\n";

    t["compress"] =
        "Compress the court judgment below to between one third and one half of its "
        "original length. Remove redundant characters and repeated procedural boilerplate "
        "while fully preserving the legal content and meaning. Return only the compressed "
        "text.\n\n"
        "{{document}}\n";

    t["extract_case"] =
        "Please extract the following key information from the given court judgment and "
        "return it in JSON format:\n"
        "{\n"
        "    \"plaintiff\": \"Name of the applicant/plaintiff\",\n"
        "    \"defendant\": \"Name of the defendant\",\n"
        "    \"plaintiff_claim\": \"claims made by the plaintiff\",\n"
        "    \"lawsuit_type\": \"e.g., judicial review application\",\n"
        "    \"facts\": [\"List of detailed factual background information\"],\n"
        "    \"related_laws\": [\"List of relevant laws or legal provisions\"],\n"
        "    \"relevant_cases\": [\"List of relevant case law or precedents cited\"],\n"
        "    \"issues\": [\"List of main issues in dispute (if any)\"],\n"
        "    \"court_reasoning\": [\"List of reasoning process or legal principles\"],\n"
        "    \"judgment_decision\": [\"List of court's final decision and orders\"]\n"
        "}\n\n"
        "Requirements:\n"
        "1. Clearly distinguish between factual statements and court opinions\n"
        "2. Organize facts and procedural content chronologically\n"
        "3. Return empty string \"\" for fields where information is not explicit\n"
        "4. Exhibit detailed information for facts and court reasoning\n"
        "5. Maintain JSON format integrity and standards\n\n"
        "judgment:\n{{document}}\n";

    t["decide_outcome"] =
        "Based on the court's judgment items below, did the court support or reject the "
        "plaintiff's claim?\n\n"
        "plaintiff_claim: {{claim}}\n"
        "judgment items:\n{{judgments}}\n\n"
        "Return JSON: {\"decision\": \"support|reject\"}\n";

    t["enhance_facts"] =
        "Review the court's reasoning and judgment below and extract any additional "
        "factual information that supplements the existing facts.\n\n"
        "Requirements:\n"
        "1. Review the court reasoning to identify facts mentioned in the decision "
        "explanation, in evidence analysis, when applying legal principles, and "
        "supporting the final judgment\n"
        "2. Extract only objective factual statements\n"
        "3. Add a fact to more_facts only if it is not already in the existing facts\n"
        "4. Maintain chronological order\n"
        "5. Do not modify other sections\n\n"
        "existing facts:\n{{facts}}\n"
        "court_reasoning:\n{{gold_reasoning}}\n"
        "judgment:\n{{judgments}}\n"
        "source document:\n{{document}}\n\n"
        "Return JSON: {\"more_facts\": [\"...\"]}\n";

    t["screen_leakage"] =
        "Check whether the fact description below reveals the judgment outcome "
        "prematurely (for example by stating what the court decided, dismissed, or "
        "awarded). Quote any offending spans verbatim.\n\n"
        "facts:\n{{facts}}\n\n"
        "Return JSON: {\"verdict\": \"clean|leaking\", \"spans\": [\"...\"]}\n";

    return t;
}

} // namespace detail

inline PromptLibrary PromptLibrary::builtin() {
    PromptLibrary lib;
    lib.version_ = "v1";
    lib.templates_ = detail::builtin_templates_v1();
    return lib;
}

} // namespace gavel
