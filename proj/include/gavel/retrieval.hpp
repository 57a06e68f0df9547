#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "gavel/backends.hpp"
#include "gavel/errors.hpp"
#include "gavel/jsonl.hpp"
#include "gavel/prompts.hpp"
#include "gavel/util.hpp"

namespace gavel {

inline constexpr int kStatuteLevels = 5;
inline constexpr std::array<const char*, kStatuteLevels> kStatuteLevelNames = {
    "chapter", "part", "article", "section", "provision"};

using StatutePath = std::array<std::string, kStatuteLevels>;

inline std::string path_string(const StatutePath& p) {
    std::string out;
    for (int i = 0; i < kStatuteLevels; ++i) {
        if (i) out += " / ";
        out += p[static_cast<size_t>(i)];
    }
    return out;
}

struct RetrievedProvision {
    StatutePath path;
    std::string text;
};

/// Five-level statute hierarchy. Interior nodes are named; leaves carry the
/// provision text. Immutable once built; concurrent reads are safe.
class StatuteTrie {
public:
    struct Node {
        std::map<std::string, Node> children; // ordered for deterministic walks
        std::string text;                     // non-empty only at provision level
    };

    struct Record {
        StatutePath path;
        std::string text;
    };

    static StatuteTrie from_records(const std::vector<Record>& records) {
        StatuteTrie trie;
        for (const auto& r : records) trie.insert(r.path, r.text, 0);
        return trie;
    }

    /// Catalog format: JSON-lines with fields chapter/part/article/section/
    /// provision plus text. Every level must be present and non-empty.
    static StatuteTrie load(const std::string& catalog_path) {
        StatuteTrie trie;
        for_each_jsonl(catalog_path, [&](const json& rec, int lineno) {
            Record r;
            for (int i = 0; i < kStatuteLevels; ++i) {
                const char* level = kStatuteLevelNames[static_cast<size_t>(i)];
                if (!rec.contains(level) || !rec[level].is_string() ||
                    rec[level].get<std::string>().empty())
                    throw ParseError(std::string("catalog record missing level \"") + level +
                                         "\"",
                                     lineno);
                r.path[static_cast<size_t>(i)] = rec[level].get<std::string>();
            }
            if (!rec.contains("text") || !rec["text"].is_string())
                throw ParseError("catalog record missing \"text\"", lineno);
            r.text = rec["text"].get<std::string>();
            trie.insert(r.path, r.text, lineno);
        });
        return trie;
    }

    const Node& root() const { return root_; }
    size_t leaf_count() const { return leaf_count_; }
    bool empty() const { return leaf_count_ == 0; }

    /// Every provision in the trie, in deterministic path order.
    std::vector<RetrievedProvision> all_provisions() const {
        std::vector<RetrievedProvision> out;
        StatutePath path;
        collect(root_, 0, path, out);
        return out;
    }

private:
    void insert(const StatutePath& path, const std::string& text, int lineno) {
        std::string key = path_string(path);
        if (!seen_paths_.insert(key).second)
            throw ParseError("duplicate provision path: " + key, lineno);
        Node* node = &root_;
        for (int i = 0; i < kStatuteLevels; ++i)
            node = &node->children[path[static_cast<size_t>(i)]];
        node->text = text;
        ++leaf_count_;
    }

    static void collect(const Node& node, int depth, StatutePath& path,
                        std::vector<RetrievedProvision>& out) {
        if (depth == kStatuteLevels) {
            out.push_back({path, node.text});
            return;
        }
        for (const auto& [name, child] : node.children) {
            path[static_cast<size_t>(depth)] = name;
            collect(child, depth + 1, path, out);
        }
    }

    Node root_;
    size_t leaf_count_ = 0;
    std::set<std::string> seen_paths_;
};

/// Walks the trie level by level, asking the backend to pick relevant children
/// at each node; at most `fanout_cap` selections are expanded per node. A
/// selection that names no existing child is re-prompted once with the valid
/// list, then dropped with a warning. Results always lie under selected paths.
inline std::vector<RetrievedProvision> retrieve_provisions(
    const std::string& query, const StatuteTrie& trie, ChatBackend& backend,
    const PromptLibrary& templates, int fanout_cap,
    std::vector<std::string>* warnings = nullptr) {
    if (trie.empty()) throw ValidationError("statute trie is empty", "trie");
    if (fanout_cap < 1) throw ValidationError("fanout_cap must be >= 1", "fanout_cap");

    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };

    struct Frontier {
        const StatuteTrie::Node* node;
        StatutePath path;
    };
    std::vector<Frontier> frontier{{&trie.root(), {}}};
    std::vector<RetrievedProvision> results;

    for (int depth = 0; depth < kStatuteLevels; ++depth) {
        std::vector<Frontier> next;
        for (const auto& f : frontier) {
            std::vector<std::string> names;
            for (const auto& [name, _] : f.node->children) names.push_back(name);
            if (names.empty()) continue;

            std::string options;
            for (const auto& n : names) options += "- " + n + "\n";
            Prompt prompt = templates.render(
                "provision_select",
                {{"level", kStatuteLevelNames[static_cast<size_t>(depth)]},
                 {"fanout_cap", std::to_string(fanout_cap)},
                 {"query", query},
                 {"children", options}});

            auto parse_selection = [&](const json& record) {
                std::vector<std::string> out;
                for (const auto& item : record.at("selected"))
                    if (item.is_string()) out.push_back(item.get<std::string>());
                return out;
            };
            JudgeResult jr = judge_json(backend, prompt, {"selected"});
            std::vector<std::string> selected = parse_selection(jr.record);

            bool any_invalid = false;
            for (const auto& s : selected)
                if (!f.node->children.count(s)) any_invalid = true;
            if (any_invalid) {
                Prompt retry = prompt;
                retry.text += "\nOne or more selections were not valid entries. The valid "
                              "entries are exactly:\n";
                for (const auto& n : names) retry.text += "- " + n + "\n";
                JudgeResult jr2 = judge_json(backend, retry, {"selected"});
                selected = parse_selection(jr2.record);
            }

            std::vector<std::string> valid;
            for (const auto& s : selected) {
                if (!f.node->children.count(s)) {
                    warn("dropped invalid selection \"" + s + "\" at level " +
                         kStatuteLevelNames[static_cast<size_t>(depth)]);
                    continue;
                }
                if (std::find(valid.begin(), valid.end(), s) != valid.end()) continue;
                if (static_cast<int>(valid.size()) == fanout_cap) {
                    warn("selection \"" + s + "\" beyond fanout cap " +
                         std::to_string(fanout_cap) + " ignored");
                    continue;
                }
                valid.push_back(s);
            }

            for (const auto& name : valid) {
                Frontier child{&f.node->children.at(name), f.path};
                child.path[static_cast<size_t>(depth)] = name;
                if (depth == kStatuteLevels - 1)
                    results.push_back({child.path, child.node->text});
                else
                    next.push_back(std::move(child));
            }
        }
        frontier = std::move(next);
        if (frontier.empty() && depth < kStatuteLevels - 1) break;
    }
    return results;
}

struct CaseEntry {
    std::string case_id;
    std::string summary;
    std::vector<float> embedding;
};

/// Exact-scan precedent store. The scan is an interface seam: stores at this
/// scale do not need an approximate index, and ties are broken by case_id so
/// results are reproducible.
class CaseStore {
public:
    explicit CaseStore(size_t dimension) : dim_(dimension) {
        if (dimension == 0) throw ValidationError("dimension must be positive", "dimension");
    }

    size_t dimension() const { return dim_; }
    size_t size() const { return entries_.size(); }
    const std::vector<CaseEntry>& entries() const { return entries_; }

    void add(CaseEntry entry) {
        if (entry.embedding.size() != dim_)
            throw ValidationError("embedding dimension mismatch: got " +
                                      std::to_string(entry.embedding.size()) + ", store has " +
                                      std::to_string(dim_),
                                  "embedding");
        entries_.push_back(std::move(entry));
    }

    /// JSON-lines entries {case_id, summary}; embeddings computed at load.
    static CaseStore load(const std::string& path, EmbeddingBackend& embedder) {
        CaseStore store(embedder.dimension());
        for_each_jsonl(path, [&](const json& rec, int lineno) {
            CaseEntry e;
            try {
                e.case_id = require_string(rec, "case_id");
                e.summary = require_string(rec, "summary");
            } catch (const ValidationError& err) {
                throw ParseError(std::string("case store: ") + err.what(), lineno);
            }
            e.embedding = embedder.embed(e.summary);
            store.add(std::move(e));
        });
        return store;
    }

    /// Sidecar layout: little-endian 32-bit floats, `dimension` per entry, in
    /// the same order as the JSONL entries.
    static CaseStore load_with_sidecar(const std::string& path, const std::string& sidecar,
                                       size_t dimension) {
        CaseStore store(dimension);
        std::vector<CaseEntry> entries;
        for_each_jsonl(path, [&](const json& rec, int lineno) {
            CaseEntry e;
            try {
                e.case_id = require_string(rec, "case_id");
                e.summary = require_string(rec, "summary");
            } catch (const ValidationError& err) {
                throw ParseError(std::string("case store: ") + err.what(), lineno);
            }
            entries.push_back(std::move(e));
        });
        std::ifstream in(sidecar, std::ios::binary);
        if (!in) throw IoError("cannot open embedding sidecar", sidecar);
        for (auto& e : entries) {
            e.embedding.resize(dimension);
            in.read(reinterpret_cast<char*>(e.embedding.data()),
                    static_cast<std::streamsize>(dimension * sizeof(float)));
            if (!in) throw IoError("sidecar truncated", sidecar);
            store.add(std::move(e));
        }
        return store;
    }

    static void save_sidecar(const CaseStore& store, const std::string& sidecar) {
        std::ofstream out(sidecar, std::ios::binary);
        if (!out) throw IoError("cannot write embedding sidecar", sidecar);
        for (const auto& e : store.entries_)
            out.write(reinterpret_cast<const char*>(e.embedding.data()),
                      static_cast<std::streamsize>(e.embedding.size() * sizeof(float)));
    }

    static double cosine(const std::vector<float>& a, const std::vector<float>& b) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            dot += static_cast<double>(a[i]) * b[i];
            na += static_cast<double>(a[i]) * a[i];
            nb += static_cast<double>(b[i]) * b[i];
        }
        if (na == 0.0 || nb == 0.0) return 0.0;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    }

    /// Top-k by cosine similarity, descending; ties by case_id ascending.
    std::vector<const CaseEntry*> nearest(const std::vector<float>& query, size_t k) const {
        if (query.size() != dim_)
            throw ValidationError("query dimension mismatch", "embedding");
        std::vector<std::pair<double, const CaseEntry*>> scored;
        scored.reserve(entries_.size());
        for (const auto& e : entries_) scored.emplace_back(cosine(query, e.embedding), &e);
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second->case_id < b.second->case_id;
        });
        std::vector<const CaseEntry*> out;
        for (size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
        return out;
    }

private:
    size_t dim_;
    std::vector<CaseEntry> entries_;
};

struct RetrievedCase {
    std::string case_id;
    std::string summary;
};

/// k_initial nearest neighbors by cosine, reranked by the chat backend, then
/// truncated to k_final. Ranking ids the backend did not mention keep their
/// pre-rerank order behind the ranked ones; unknown ids are ignored.
inline std::vector<RetrievedCase> retrieve_cases(const std::string& query,
                                                 const CaseStore& store,
                                                 EmbeddingBackend& embedder,
                                                 ChatBackend& reranker,
                                                 const PromptLibrary& templates,
                                                 size_t k_initial, size_t k_final = 3) {
    if (store.size() == 0) throw ValidationError("case store is empty", "store");
    std::vector<float> qv = embedder.embed(query);
    std::vector<const CaseEntry*> initial = store.nearest(qv, k_initial);

    std::string candidates;
    for (const auto* e : initial) candidates += e->case_id + ": " + e->summary + "\n";
    Prompt prompt = templates.render("rerank", {{"query", query}, {"candidates", candidates}});
    JudgeResult jr = judge_json(reranker, prompt, {"ranking"});

    std::vector<const CaseEntry*> ordered;
    auto push_unique = [&](const CaseEntry* e) {
        for (const auto* seen : ordered)
            if (seen == e) return;
        ordered.push_back(e);
    };
    for (const auto& id : jr.record.at("ranking")) {
        if (!id.is_string()) continue;
        for (const auto* e : initial)
            if (e->case_id == id.get<std::string>()) push_unique(e);
    }
    for (const auto* e : initial) push_unique(e);

    std::vector<RetrievedCase> out;
    for (size_t i = 0; i < ordered.size() && i < k_final; ++i)
        out.push_back({ordered[i]->case_id, ordered[i]->summary});
    return out;
}

/// Backend-generated precedent summaries, cached by (case_id, query).
class CaseSummarizer {
public:
    CaseSummarizer(ChatBackend& chat, const PromptLibrary& templates)
        : chat_(chat), templates_(templates) {}

    std::string summarize(const RetrievedCase& c, const std::string& query) {
        std::string key = c.case_id + ":" + to_hex(fnv1a64(query));
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        Prompt p = templates_.render("summarize_case", {{"summary", c.summary}});
        std::string s = trim(chat_.complete(p, {}));
        cache_[key] = s;
        return s;
    }

private:
    ChatBackend& chat_;
    const PromptLibrary& templates_;
    std::map<std::string, std::string> cache_;
};

} // namespace gavel
