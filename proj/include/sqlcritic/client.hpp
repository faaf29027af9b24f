#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace sqlcritic {

enum class ClientRole { Generator, Annotator, Corrector, Judge };

std::string_view client_role_name(ClientRole role);

/// Endpoint configuration for one model role.
struct ClientConfig {
    ClientRole role = ClientRole::Generator;
    std::string endpoint;     // http(s) URL, or a mock:* scheme for offline runs
    std::string model_name;
    std::string api_key_env;  // environment variable holding the bearer token
    double temperature = 0.0;
    int n_samples = 1;
    double timeout_s = 60.0;
};

struct ChatMessage {
    std::string role;  // "system" | "user"
    std::string content;
};

/// One completion request. `metadata` never goes over the wire; it carries
/// item context (question, gold_sql, ...) so local mock clients can respond
/// deterministically.
struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int n = 1;
    std::map<std::string, std::string> metadata;
};

/// A chat-completion endpoint. complete() returns up to n choices and throws
/// ClientError on transport or protocol failures. Implementations must be
/// callable from multiple threads.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::vector<std::string> complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;

    int call_count() const { return calls_.load(); }

protected:
    void count_call() { calls_.fetch_add(1); }

private:
    std::atomic<int> calls_{0};
};

/// JSON-over-HTTP chat-completion client. Sends
///   {"model": ..., "messages": [...], "temperature": ..., "n": ...}
/// and reads choices[i].message.content from the response.
std::unique_ptr<ChatClient> make_http_client(const ClientConfig& config);

/// Scripted client for tests.
class MockChatClient : public ChatClient {
public:
    using Handler = std::function<std::vector<std::string>(const ChatRequest&)>;

    explicit MockChatClient(Handler handler, std::string name = "mock")
        : handler_(std::move(handler)), name_(std::move(name)) {}

    std::vector<std::string> complete(const ChatRequest& request) override {
        count_call();
        return handler_(request);
    }
    std::string name() const override { return name_; }

private:
    Handler handler_;
    std::string name_;
};

struct RetryPolicy {
    int budget = 3;              // total attempts
    double backoff_initial_ms = 250.0;
    double backoff_multiplier = 2.0;
};

/// Retries ClientError failures with exponential backoff, then rethrows.
class RetryingClient : public ChatClient {
public:
    RetryingClient(std::unique_ptr<ChatClient> inner, RetryPolicy policy)
        : inner_(std::move(inner)), policy_(policy) {}

    std::vector<std::string> complete(const ChatRequest& request) override;
    std::string name() const override { return inner_->name(); }

    ChatClient& inner() { return *inner_; }

private:
    std::unique_ptr<ChatClient> inner_;
    RetryPolicy policy_;
};

/// Builds a client for the endpoint: http(s):// endpoints get the HTTP
/// client; the built-in offline endpoints (mock:generator, mock:annotator,
/// mock:corrector, mock:corrector-noop, mock:echo) get deterministic local
/// implementations. The result is wrapped with the retry policy.
std::unique_ptr<ChatClient> make_client(const ClientConfig& config, const RetryPolicy& retry);

}  // namespace sqlcritic
