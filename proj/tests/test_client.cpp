#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sqlcritic/client.hpp"
#include "sqlcritic/errors.hpp"

using namespace sqlcritic;

namespace {

struct LocalServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::atomic<int> hits{0};

    explicit LocalServer(int fail_first_n = 0) {
        server.Post("/v1/chat/completions", [this, fail_first_n](const httplib::Request& req,
                                                                 httplib::Response& res) {
            int hit = ++hits;
            if (hit <= fail_first_n) {
                res.status = 503;
                return;
            }
            auto body = nlohmann::json::parse(req.body);
            std::string content = "echo: " +
                                  body["messages"].back()["content"].get<std::string>();
            nlohmann::json reply = {
                {"choices", nlohmann::json::array({{{"message", {{"content", content}}}}})}};
            res.set_content(reply.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        thread.join();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    }
};

ChatRequest hello_request() {
    ChatRequest req;
    req.messages = {{"system", "You are a test."}, {"user", "hello"}};
    req.n = 1;
    return req;
}

}  // namespace

TEST_CASE("http client round trip against a local endpoint") {
    LocalServer srv;
    ClientConfig cfg;
    cfg.endpoint = srv.endpoint();
    cfg.model_name = "test-model";
    auto client = make_http_client(cfg);
    auto choices = client->complete(hello_request());
    REQUIRE(choices.size() == 1);
    CHECK(choices[0] == "echo: hello");
    CHECK(client->call_count() == 1);
}

TEST_CASE("retry recovers from transient failures and then gives up") {
    {
        LocalServer flaky(/*fail_first_n=*/2);
        ClientConfig cfg;
        cfg.endpoint = flaky.endpoint();
        RetryPolicy fast{/*budget=*/3, /*backoff_initial_ms=*/0.0, 2.0};
        auto client = make_client(cfg, fast);
        auto choices = client->complete(hello_request());
        CHECK(choices[0] == "echo: hello");
        CHECK(flaky.hits.load() == 3);
    }
    {
        LocalServer dead(/*fail_first_n=*/1000);
        ClientConfig cfg;
        cfg.endpoint = dead.endpoint();
        RetryPolicy fast{/*budget=*/3, /*backoff_initial_ms=*/0.0, 2.0};
        auto client = make_client(cfg, fast);
        CHECK_THROWS_AS(client->complete(hello_request()), ClientError);
        CHECK(dead.hits.load() == 3);
    }
}

TEST_CASE("unreachable endpoint raises ClientError") {
    ClientConfig cfg;
    cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    cfg.timeout_s = 1.0;
    auto client = make_http_client(cfg);
    CHECK_THROWS_AS(client->complete(hello_request()), ClientError);
}

TEST_CASE("mock generator produces gold, perturbed and broken variants") {
    ClientConfig cfg;
    cfg.endpoint = "mock:generator";
    RetryPolicy no_retry{1, 0.0, 1.0};
    auto gen = make_client(cfg, no_retry);

    ChatRequest req;
    req.n = 5;
    req.metadata["question"] = "How many singers are older than 40?";
    req.metadata["gold_sql"] = "SELECT count(*) FROM singer WHERE age > 40";
    auto variants = gen->complete(req);
    REQUIRE(variants.size() == 5);

    bool has_gold = false;
    bool has_misspelled = false;
    for (const auto& v : variants) {
        has_gold = has_gold || v == req.metadata["gold_sql"];
        has_misspelled = has_misspelled || v.rfind("SELEC ", 0) == 0;
    }
    CHECK(has_gold);
    CHECK(has_misspelled);

    // Deterministic: same request, same variants.
    CHECK(gen->complete(req) == variants);
}

TEST_CASE("mock annotator emits a parseable clause critique") {
    ClientConfig cfg;
    cfg.endpoint = "mock:annotator";
    auto ann = make_client(cfg, {1, 0.0, 1.0});
    ChatRequest req;
    req.metadata["pred_sql"] = "SELECT name FROM singer WHERE age > 41";
    req.metadata["gold_sql"] = "SELECT count(*) FROM singer WHERE age > 40";
    auto out = ann->complete(req);
    REQUIRE(out.size() == 1);
    CHECK(out[0].find("- [SELECT]") != std::string::npos);
    CHECK(out[0].find("- [WHERE]") != std::string::npos);
}

TEST_CASE("mock correctors: fix vs noop") {
    ChatRequest req;
    req.metadata["pred_sql"] = "SELECT name FROM singer";
    req.metadata["gold_sql"] = "SELECT count(*) FROM singer";

    ClientConfig fix;
    fix.endpoint = "mock:corrector";
    CHECK(make_client(fix, {1, 0.0, 1.0})->complete(req)[0] == "SELECT count(*) FROM singer");

    ClientConfig noop;
    noop.endpoint = "mock:corrector-noop";
    CHECK(make_client(noop, {1, 0.0, 1.0})->complete(req)[0] == "SELECT name FROM singer");

    ClientConfig bogus;
    bogus.endpoint = "mock:nothing";
    CHECK_THROWS_AS(make_client(bogus, {1, 0.0, 1.0}), ConfigError);
}
