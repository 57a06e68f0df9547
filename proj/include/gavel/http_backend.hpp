#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>

#include "gavel/backends.hpp"
#include "gavel/errors.hpp"
#include "gavel/jsonl.hpp"

namespace gavel {

/// ChatBackend speaking the OpenAI-compatible chat-completions wire shape.
/// The API key is read from the named environment variable at call time and
/// never stored in config snapshots.
class HttpChatBackend : public ChatBackend {
public:
    struct Options {
        std::string base_url;   // e.g. http://127.0.0.1:8080
        std::string model;
        std::string api_key_env = "GAVEL_API_KEY";
        int max_retries = 3;    // transport retries, exponential backoff
        int backoff_ms = 200;
        int timeout_s = 120;
        bool logprobs = false;
    };

    explicit HttpChatBackend(Options opts) : opts_(std::move(opts)) {
        if (opts_.base_url.empty()) throw ValidationError("base_url required", "base_url");
    }

    std::string name() const override { return "http:" + opts_.model; }
    bool supports_logprobs() const override { return opts_.logprobs; }

    std::string complete(const Prompt& prompt, const SamplingParams& sampling) override {
        json body = request_body(prompt, sampling);
        json resp = post_with_retries(body);
        try {
            return resp.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            throw BackendError("malformed chat-completions response", /*retryable=*/false,
                               resp.dump());
        }
    }

    TokenLogprobs first_token_logprobs(const Prompt& prompt,
                                       const SamplingParams& sampling) override {
        if (!opts_.logprobs)
            throw BackendError("backend does not support logprobs", /*retryable=*/false);
        json body = request_body(prompt, sampling);
        body["logprobs"] = true;
        body["top_logprobs"] = 20;
        body["max_tokens"] = 1;
        json resp = post_with_retries(body);
        TokenLogprobs out;
        try {
            const json& top =
                resp.at("choices").at(0).at("logprobs").at("content").at(0).at("top_logprobs");
            for (const auto& item : top)
                out.top_logprobs[item.at("token").get<std::string>()] =
                    item.at("logprob").get<double>();
        } catch (const json::exception&) {
            throw BackendError("malformed logprobs response", /*retryable=*/false, resp.dump());
        }
        return out;
    }

private:
    json request_body(const Prompt& prompt, const SamplingParams& sampling) const {
        json body{{"model", opts_.model},
                  {"messages", json::array({json{{"role", "user"}, {"content", prompt.text}}})},
                  {"temperature", sampling.temperature},
                  {"max_tokens", sampling.max_tokens}};
        if (sampling.temperature > 0.0) body["seed"] = sampling.seed + sampling.sample_index;
        return body;
    }

    json post_with_retries(const json& body) {
        std::string last_error;
        for (int attempt = 0; attempt <= opts_.max_retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(opts_.backoff_ms << (attempt - 1)));
            httplib::Client client(opts_.base_url);
            client.set_read_timeout(opts_.timeout_s, 0);
            httplib::Headers headers;
            if (const char* key = std::getenv(opts_.api_key_env.c_str()))
                headers.emplace("Authorization", std::string("Bearer ") + key);
            auto res = client.Post("/v1/chat/completions", headers, body.dump(),
                                   "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw BackendError("chat-completions returned " + std::to_string(res->status),
                                   /*retryable=*/false, res->body);
            try {
                return json::parse(res->body);
            } catch (const json::parse_error& e) {
                throw BackendError(std::string("response is not JSON: ") + e.what(),
                                   /*retryable=*/false, res->body);
            }
        }
        throw BackendError("chat-completions failed after " +
                               std::to_string(opts_.max_retries + 1) + " attempts: " + last_error,
                           /*retryable=*/true);
    }

    Options opts_;
};

} // namespace gavel
