#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "gavel/errors.hpp"

namespace gavel {

using json = nlohmann::json;

/// Calls `fn(record, line_number)` for every non-blank line of a JSON-lines file.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(const json&, int)>& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file", path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
        }
        fn(rec, lineno);
    }
}

class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path) : path_(path), out_(path) {
        if (!out_) throw IoError("cannot open file for writing", path);
    }

    void write(const json& rec) {
        out_ << rec.dump() << '\n';
        if (!out_) throw IoError("write failed", path_);
    }

    void close() {
        out_.close();
        if (out_.fail()) throw IoError("close failed", path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

inline std::string require_string(const json& rec, const std::string& key) {
    if (!rec.contains(key) || !rec[key].is_string())
        throw ValidationError("missing or non-string field", key);
    return rec[key].get<std::string>();
}

inline std::vector<std::string> string_list(const json& rec, const std::string& key) {
    std::vector<std::string> out;
    if (!rec.contains(key)) return out;
    const json& v = rec[key];
    if (v.is_string()) {
        // Single string is accepted where a list is expected; empty means absent.
        if (!v.get<std::string>().empty()) out.push_back(v.get<std::string>());
        return out;
    }
    if (!v.is_array()) throw ValidationError("expected a list of strings", key);
    for (const auto& item : v) {
        if (!item.is_string()) throw ValidationError("expected a list of strings", key);
        out.push_back(item.get<std::string>());
    }
    return out;
}

} // namespace gavel
