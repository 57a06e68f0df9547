#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gavel/backends.hpp"
#include "gavel/errors.hpp"
#include "gavel/jsonl.hpp"

namespace gavel {

/// One scripted response rule. A rule matches when the prompt's template name
/// equals `template_name` (empty = any) and the rendered text contains every
/// `contains` substring. Responses are selected by sample index: an explicit
/// `by_sample` entry wins, else `responses[sample_index % responses.size()]`.
struct ScriptedRule {
    std::string template_name;
    std::vector<std::string> contains;
    std::vector<std::string> responses;
    std::map<int, std::string> by_sample;

    bool matches(const Prompt& prompt) const {
        if (!template_name.empty()) {
            std::string name = prompt.template_id.substr(0, prompt.template_id.find('@'));
            if (name != template_name) return false;
        }
        for (const auto& sub : contains)
            if (prompt.text.find(sub) == std::string::npos) return false;
        return true;
    }

    std::string pick(int sample_index) const {
        if (auto it = by_sample.find(sample_index); it != by_sample.end()) return it->second;
        if (responses.empty())
            throw Error("scripted rule has no response for sample " +
                        std::to_string(sample_index));
        return responses[static_cast<size_t>(sample_index) % responses.size()];
    }
};

/// Deterministic ChatBackend test double: exact (fingerprint, sample) table
/// first, then ordered rules, then the fallback policy. Configure fully
/// before first use; immutable afterwards, so concurrent calls are safe.
class ScriptedChatBackend : public ChatBackend {
public:
    enum class Fallback { Error, Canned };

    ScriptedChatBackend() = default;

    std::string name() const override { return "scripted"; }

    ScriptedChatBackend& add_rule(ScriptedRule rule) {
        if (rule.responses.empty() && rule.by_sample.empty())
            throw ValidationError("rule needs responses or by_sample", "responses");
        rules_.push_back(std::move(rule));
        return *this;
    }

    /// Shorthand: match on template name + one substring.
    ScriptedChatBackend& on(const std::string& template_name, const std::string& contains,
                            std::string response) {
        ScriptedRule r;
        r.template_name = template_name;
        if (!contains.empty()) r.contains.push_back(contains);
        r.responses.push_back(std::move(response));
        return add_rule(std::move(r));
    }

    ScriptedChatBackend& add_exact(const std::string& fingerprint, int sample_index,
                                   std::string response) {
        exact_[{fingerprint, sample_index}] = std::move(response);
        return *this;
    }

    ScriptedChatBackend& fallback_canned(std::string text) {
        fallback_ = Fallback::Canned;
        canned_ = std::move(text);
        return *this;
    }

    ScriptedChatBackend& fallback_error() {
        fallback_ = Fallback::Error;
        return *this;
    }

    std::string complete(const Prompt& prompt, const SamplingParams& sampling) override {
        if (auto it = exact_.find({prompt.fingerprint(), sampling.sample_index});
            it != exact_.end())
            return it->second;
        for (const auto& rule : rules_)
            if (rule.matches(prompt)) return rule.pick(sampling.sample_index);
        if (fallback_ == Fallback::Canned) return canned_;
        throw BackendError("no scripted response for prompt " + prompt.fingerprint() +
                               " sample " + std::to_string(sampling.sample_index),
                           /*retryable=*/false, prompt.text);
    }

    /// Fixture file format (JSON):
    ///   {"fallback": {"policy": "error"} | {"policy": "canned", "text": "..."},
    ///    "rules": [{"template": "...", "contains": ["..."],
    ///               "responses": ["..."], "by_sample": {"0": "..."}}],
    ///    "exact": [{"fingerprint": "...", "sample": 0, "response": "..."}]}
    static ScriptedChatBackend from_fixture(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open fixture", path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ParseError("fixture " + path + ": " + e.what());
        }
        ScriptedChatBackend b;
        if (j.contains("fallback")) {
            const json& f = j["fallback"];
            std::string policy = f.value("policy", "error");
            if (policy == "canned")
                b.fallback_canned(f.value("text", ""));
            else if (policy == "error")
                b.fallback_error();
            else
                throw ParseError("fixture fallback policy must be error|canned");
        }
        for (const auto& rj : j.value("rules", json::array())) {
            ScriptedRule r;
            r.template_name = rj.value("template", "");
            for (const auto& s : rj.value("contains", json::array()))
                r.contains.push_back(s.get<std::string>());
            for (const auto& s : rj.value("responses", json::array()))
                r.responses.push_back(s.get<std::string>());
            if (rj.contains("by_sample"))
                for (auto it = rj["by_sample"].begin(); it != rj["by_sample"].end(); ++it)
                    r.by_sample[std::stoi(it.key())] = it.value().get<std::string>();
            b.add_rule(std::move(r));
        }
        for (const auto& ej : j.value("exact", json::array()))
            b.add_exact(ej.at("fingerprint").get<std::string>(), ej.value("sample", 0),
                        ej.at("response").get<std::string>());
        return b;
    }

private:
    std::vector<ScriptedRule> rules_;
    std::map<std::pair<std::string, int>, std::string> exact_;
    Fallback fallback_ = Fallback::Error;
    std::string canned_;
};

/// ChatBackend driven by a function; for test doubles that must compute their
/// reply from the prompt (e.g. select-everything retrieval oracles).
class LambdaChatBackend : public ChatBackend {
public:
    using Fn = std::function<std::string(const Prompt&, const SamplingParams&)>;
    explicit LambdaChatBackend(Fn fn) : fn_(std::move(fn)) {}
    std::string name() const override { return "lambda"; }
    std::string complete(const Prompt& prompt, const SamplingParams& sampling) override {
        return fn_(prompt, sampling);
    }

private:
    Fn fn_;
};

/// Deterministic ScoreBackend double: ordered (perspective, substring) rules
/// with an optional default. Scripting a value outside [0,1] is allowed so
/// callers' range rejection can be exercised.
class ScriptedScoreBackend : public ScoreBackend {
public:
    struct Rule {
        std::optional<Perspective> perspective;
        std::string contains;
        double score;
    };

    ScriptedScoreBackend& on(Perspective p, const std::string& contains, double score) {
        rules_.push_back({p, contains, score});
        return *this;
    }

    ScriptedScoreBackend& on_any(const std::string& contains, double score) {
        rules_.push_back({std::nullopt, contains, score});
        return *this;
    }

    ScriptedScoreBackend& default_score(double score) {
        default_ = score;
        return *this;
    }

    double score_step(const ScoreContext&, const std::string& step_text,
                      Perspective perspective) override {
        for (const auto& r : rules_) {
            if (r.perspective && *r.perspective != perspective) continue;
            if (!r.contains.empty() && step_text.find(r.contains) == std::string::npos) continue;
            return r.score;
        }
        if (default_) return *default_;
        throw BackendError("no scripted score for step \"" + step_text + "\" perspective " +
                               to_string(perspective),
                           /*retryable=*/false);
    }

private:
    std::vector<Rule> rules_;
    std::optional<double> default_;
};

/// Deterministic OutcomeScorer double keyed by candidate decision/judgment text.
class ScriptedOutcomeScorer : public OutcomeScorer {
public:
    ScriptedOutcomeScorer& on(const std::string& contains, double score) {
        rules_.emplace_back(contains, score);
        return *this;
    }
    ScriptedOutcomeScorer& default_score(double score) {
        default_ = score;
        return *this;
    }

    double score_outcome(const LegalCase&, const std::vector<std::string>& judgments,
                         int) override {
        std::string all = join(judgments, "\n");
        for (const auto& [contains, score] : rules_)
            if (all.find(contains) != std::string::npos) return score;
        if (default_) return *default_;
        throw BackendError("no scripted outcome score", /*retryable=*/false);
    }

private:
    std::vector<std::pair<std::string, double>> rules_;
    std::optional<double> default_;
};

/// Deterministic embedding double. Exact texts can be pinned to vectors; any
/// other text hashes to a stable pseudo-embedding of the declared dimension.
class ScriptedEmbeddingBackend : public EmbeddingBackend {
public:
    explicit ScriptedEmbeddingBackend(size_t dimension) : dim_(dimension) {}

    ScriptedEmbeddingBackend& pin(const std::string& text, std::vector<float> vec) {
        if (vec.size() != dim_)
            throw ValidationError("pinned vector has wrong dimension", "embedding");
        pinned_[text] = std::move(vec);
        return *this;
    }

    size_t dimension() const override { return dim_; }

    std::vector<float> embed(const std::string& text) override {
        if (auto it = pinned_.find(text); it != pinned_.end()) return it->second;
        std::vector<float> v(dim_);
        uint64_t h = fnv1a64(text);
        for (size_t i = 0; i < dim_; ++i) {
            h = fnv1a64(std::to_string(i), h);
            // map to [-1, 1)
            v[i] = static_cast<float>(static_cast<double>(h % 2000003ull) / 1000001.5 - 1.0);
        }
        return v;
    }

private:
    size_t dim_;
    std::map<std::string, std::vector<float>> pinned_;
};

} // namespace gavel
