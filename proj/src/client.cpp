#include "sqlcritic/client.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sqlcritic/critique.hpp"
#include "sqlcritic/errors.hpp"
#include "sqlcritic/hash.hpp"
#include "sqlcritic/lexer.hpp"
#include "sqlcritic/parser.hpp"

namespace sqlcritic {

std::string hex64(uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

std::string_view client_role_name(ClientRole role) {
    switch (role) {
        case ClientRole::Generator: return "generator";
        case ClientRole::Annotator: return "annotator";
        case ClientRole::Corrector: return "corrector";
        case ClientRole::Judge: return "judge";
    }
    return "?";
}

namespace {

std::string metadata_or(const ChatRequest& request, const std::string& key) {
    auto it = request.metadata.find(key);
    return it == request.metadata.end() ? std::string() : it->second;
}

// ---------------------------------------------------------------------------
// HTTP client
// ---------------------------------------------------------------------------

class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(ClientConfig config) : config_(std::move(config)) {
        size_t scheme = config_.endpoint.find("://");
        if (scheme == std::string::npos)
            throw ConfigError("endpoint is not a URL: " + config_.endpoint);
        size_t path_start = config_.endpoint.find('/', scheme + 3);
        if (path_start == std::string::npos) {
            base_ = config_.endpoint;
            path_ = "/v1/chat/completions";
        } else {
            base_ = config_.endpoint.substr(0, path_start);
            path_ = config_.endpoint.substr(path_start);
        }
    }

    std::vector<std::string> complete(const ChatRequest& request) override {
        count_call();
        nlohmann::json body;
        body["model"] = config_.model_name;
        body["temperature"] = request.temperature;
        body["n"] = request.n;
        body["messages"] = nlohmann::json::array();
        for (const auto& m : request.messages)
            body["messages"].push_back({{"role", m.role}, {"content", m.content}});

        httplib::Client http(base_);
        http.set_connection_timeout(std::chrono::duration<double>(config_.timeout_s));
        http.set_read_timeout(std::chrono::duration<double>(config_.timeout_s));
        httplib::Headers headers;
        if (!config_.api_key_env.empty()) {
            if (const char* key = std::getenv(config_.api_key_env.c_str()))
                headers.emplace("Authorization", std::string("Bearer ") + key);
        }

        auto res = http.Post(path_, headers, body.dump(), "application/json");
        if (!res)
            throw ClientError("no response from " + base_ + ": " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw ClientError("HTTP " + std::to_string(res->status) + " from " + base_ + path_);

        nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array())
            throw ClientError("malformed completion response from " + base_);
        std::vector<std::string> out;
        for (const auto& choice : parsed["choices"]) {
            if (choice.contains("message") && choice["message"].contains("content")) {
                out.push_back(choice["message"]["content"].get<std::string>());
            } else if (choice.contains("text")) {
                out.push_back(choice["text"].get<std::string>());
            }
        }
        if (out.empty()) throw ClientError("completion response carried no choices");
        return out;
    }

    std::string name() const override { return "http:" + base_; }

private:
    ClientConfig config_;
    std::string base_;
    std::string path_;
};

// ---------------------------------------------------------------------------
// Offline mock clients. Deterministic functions of the request metadata, so
// pipeline runs are reproducible without any endpoint.
// ---------------------------------------------------------------------------

// Bump the first literal: numbers +1, strings get a suffix. Falls back to
// appending LIMIT 1.
std::string perturb_literal(const std::string& sql) {
    std::vector<Token> toks;
    try {
        toks = lex(sql);
    } catch (const ParseError&) {
        return sql + " LIMIT 1";
    }
    for (const auto& t : toks) {
        if (t.cat == TokCat::Number) {
            std::string bumped = std::to_string(std::strtoll(t.text.c_str(), nullptr, 10) + 1);
            std::string out = sql;
            out.replace(t.offset, t.text.size(), bumped);
            return out;
        }
        if (t.cat == TokCat::String && t.text.size() >= 2) {
            std::string out = sql;
            out.insert(t.offset + t.text.size() - 1, "_x");
            return out;
        }
    }
    return sql + " LIMIT 1";
}

// Replace the SELECT body with *: wrong columns, same shape.
std::string star_select(const std::string& sql) {
    try {
        auto d = decompose(sql);
        std::string out;
        for (const auto& c : d.clauses) {
            if (!out.empty()) out += ' ';
            out += c.kind == ClauseKind::Select ? std::string("SELECT *") : c.text;
        }
        return out;
    } catch (const ParseError&) {
        return sql;
    }
}

class MockGenerator : public ChatClient {
public:
    std::vector<std::string> complete(const ChatRequest& request) override {
        count_call();
        std::string gold = metadata_or(request, "gold_sql");
        std::string question = metadata_or(request, "question");
        if (gold.empty()) throw ClientError("mock:generator needs gold_sql metadata");

        const std::string divergent =
            gold +
            " UNION SELECT a, b, c FROM x JOIN y ON x.i = y.i JOIN z ON y.j = z.j "
            "GROUP BY a HAVING count(*) > 1 ORDER BY b DESC LIMIT 5";
        const std::string variants[5] = {
            gold,
            perturb_literal(gold),
            star_select(gold),
            divergent,
            "SELEC" + gold.substr(gold.find_first_of(" \t")),  // misspelled keyword
        };
        uint64_t h = fnv1a64(question);
        std::vector<std::string> out;
        for (int i = 0; i < request.n; ++i) out.push_back(variants[(h + i) % 5]);
        return out;
    }
    std::string name() const override { return "mock:generator"; }
};

class MockAnnotator : public ChatClient {
public:
    std::vector<std::string> complete(const ChatRequest& request) override {
        count_call();
        std::string pred = metadata_or(request, "pred_sql");
        std::string gold = metadata_or(request, "gold_sql");
        if (pred.empty() || gold.empty())
            throw ClientError("mock:annotator needs pred_sql and gold_sql metadata");
        Critique critique = diff_critique(decompose(pred), decompose(gold));
        return {serialize_critique(critique)};
    }
    std::string name() const override { return "mock:annotator"; }
};

// Applies the critique perfectly: answers with the gold query.
class MockCorrector : public ChatClient {
public:
    std::vector<std::string> complete(const ChatRequest& request) override {
        count_call();
        std::string gold = metadata_or(request, "gold_sql");
        if (gold.empty()) throw ClientError("mock:corrector needs gold_sql metadata");
        return {gold};
    }
    std::string name() const override { return "mock:corrector"; }
};

// Ignores the critique: returns the prediction unchanged, so validation fails.
class MockCorrectorNoop : public ChatClient {
public:
    std::vector<std::string> complete(const ChatRequest& request) override {
        count_call();
        return {metadata_or(request, "pred_sql")};
    }
    std::string name() const override { return "mock:corrector-noop"; }
};

// Echoes the last user message. Generic plumbing for tests.
class MockEcho : public ChatClient {
public:
    std::vector<std::string> complete(const ChatRequest& request) override {
        count_call();
        for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
            if (it->role == "user") return {it->content};
        }
        return {""};
    }
    std::string name() const override { return "mock:echo"; }
};

}  // namespace

std::vector<std::string> RetryingClient::complete(const ChatRequest& request) {
    double backoff_ms = policy_.backoff_initial_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            return inner_->complete(request);
        } catch (const ClientError&) {
            if (attempt >= policy_.budget) throw;
            if (backoff_ms > 0.0)
                std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(backoff_ms));
            backoff_ms *= policy_.backoff_multiplier;
        }
    }
}

std::unique_ptr<ChatClient> make_http_client(const ClientConfig& config) {
    return std::make_unique<HttpChatClient>(config);
}

std::unique_ptr<ChatClient> make_client(const ClientConfig& config, const RetryPolicy& retry) {
    std::unique_ptr<ChatClient> inner;
    if (config.endpoint == "mock:generator") {
        inner = std::make_unique<MockGenerator>();
    } else if (config.endpoint == "mock:annotator") {
        inner = std::make_unique<MockAnnotator>();
    } else if (config.endpoint == "mock:corrector") {
        inner = std::make_unique<MockCorrector>();
    } else if (config.endpoint == "mock:corrector-noop") {
        inner = std::make_unique<MockCorrectorNoop>();
    } else if (config.endpoint == "mock:echo") {
        inner = std::make_unique<MockEcho>();
    } else if (config.endpoint.rfind("mock:", 0) == 0) {
        throw ConfigError("unknown mock endpoint: " + config.endpoint);
    } else {
        inner = make_http_client(config);
    }
    return std::make_unique<RetryingClient>(std::move(inner), retry);
}

}  // namespace sqlcritic
