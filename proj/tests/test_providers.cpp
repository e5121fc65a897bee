#include <doctest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <thread>

#include <nlohmann/json.hpp>

#include "ragtuner/components/providers.hpp"
#include "ragtuner/dem/store.hpp"
#include "ragtuner/errors.hpp"

using namespace ragtuner;
using components::embed_stub;
using components::embed_stub_one;
using components::generate_stub;
using nlohmann::json;

TEST_CASE("embed_stub is deterministic and normalized") {
    auto a = embed_stub({"abc"}, 64);
    auto b = embed_stub({"abc"}, 64);
    CHECK(a == b);
    double norm = 0.0;
    for (double x : a[0]) norm += x * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(dem::cosine_similarity(embed_stub_one("the cat sat", 64),
                                 embed_stub_one("the cat sat", 64)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("embed_stub: all-empty input maps to the zero vector") {
    auto v = embed_stub_one("", 64);
    for (double x : v) CHECK(x == 0.0);
    CHECK(dem::cosine_similarity(v, embed_stub_one("cat", 64)) == 0.0);
}

TEST_CASE("embed_stub: shared tokens pull cosine up") {
    double related = dem::cosine_similarity(embed_stub_one("cat", 64),
                                            embed_stub_one("cat dog", 64));
    double unrelated = dem::cosine_similarity(embed_stub_one("cat", 64),
                                              embed_stub_one("zebra quark", 64));
    CHECK(related > unrelated);
}

TEST_CASE("embed_stub rejects tiny dimensions") {
    CHECK_THROWS_AS(embed_stub_one("x", 4), std::invalid_argument);
}

TEST_CASE("generate_stub picks the sentence with maximal question overlap") {
    CHECK(generate_stub("capital of France", {"Paris is the capital of France."}) ==
          "Paris is the capital of France.");
    CHECK(generate_stub("anything", {}) == "");
    // overlaps 3 vs 1: first sentence shares of/capital/france, second only paris
    std::string ctx = "The capital of France is large. Paris has cafes.";
    CHECK(generate_stub("capital of France", {ctx}) == "The capital of France is large.");
}

TEST_CASE("generation prompt carries contexts in rank order, or a no-context marker") {
    auto prompt = components::build_generation_prompt("why?", {"first ctx", "second ctx"});
    auto p1 = prompt.find("[1] first ctx");
    auto p2 = prompt.find("[2] second ctx");
    REQUIRE(p1 != std::string::npos);
    REQUIRE(p2 != std::string::npos);
    CHECK(p1 < p2);
    CHECK(prompt.find("Question: why?") != std::string::npos);

    auto empty = components::build_generation_prompt("why?", {});
    CHECK(empty.find("(no context provided)") != std::string::npos);
}

namespace {

struct MockServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit MockServer() = default;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~MockServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

components::ProviderConfig test_config(const MockServer& mock) {
    components::ProviderConfig config;
    config.base_url = mock.base_url();
    config.api_key = "test-key";
    config.model = "test-model";
    config.backoff_ms = 5;
    config.batch_size = 2;
    return config;
}

}  // namespace

TEST_CASE("remote embeddings: empty input makes no network call") {
    components::ProviderConfig config;
    config.base_url = "http://127.0.0.1:1";  // nothing listens here
    components::RemoteEmbeddingProvider provider(config);
    CHECK(provider.embed({}).empty());
}

TEST_CASE("remote embeddings pass through in order, batched") {
    MockServer mock;
    std::atomic<int> calls{0};
    mock.server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        auto body = json::parse(req.body);
        json data = json::array();
        for (std::size_t i = 0; i < body["input"].size(); ++i) {
            double tag = static_cast<double>(body["input"][i].get<std::string>().size());
            data.push_back({{"index", i}, {"embedding", {tag, 0.0}}});
        }
        res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    mock.start();

    components::RemoteEmbeddingProvider provider(test_config(mock));
    auto vectors = provider.embed({"a", "bb", "ccc"});
    REQUIRE(vectors.size() == 3);
    CHECK(vectors[0][0] == doctest::Approx(1.0));
    CHECK(vectors[1][0] == doctest::Approx(2.0));
    CHECK(vectors[2][0] == doctest::Approx(3.0));
    CHECK(calls.load() == 2);  // batch size 2 -> two requests
}

TEST_CASE("remote embeddings retry transient failures") {
    MockServer mock;
    std::atomic<int> calls{0};
    mock.server.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        int n = ++calls;
        if (n <= 2) {
            res.status = 500;
            res.set_content("boom", "text/plain");
            return;
        }
        res.set_content(
            json{{"data", json::array({{{"index", 0}, {"embedding", {1.0}}}})}}.dump(),
            "application/json");
    });
    mock.start();

    components::RemoteEmbeddingProvider provider(test_config(mock));
    auto vectors = provider.embed({"x"});
    REQUIRE(vectors.size() == 1);
    CHECK(calls.load() == 3);  // 500, 500, 200
}

TEST_CASE("remote embeddings give up after max attempts") {
    MockServer mock;
    mock.server.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("unavailable", "text/plain");
    });
    mock.start();

    components::RemoteEmbeddingProvider provider(test_config(mock));
    try {
        provider.embed({"x"});
        FAIL("expected ProviderError");
    } catch (const Error& ex) {
        CHECK(ex.code() == ErrorCode::ProviderError);
        CHECK(std::string(ex.what()).find("503") != std::string::npos);
    }
}

TEST_CASE("remote embeddings fail fast on non-transient statuses") {
    MockServer mock;
    std::atomic<int> calls{0};
    mock.server.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    mock.start();

    components::RemoteEmbeddingProvider provider(test_config(mock));
    CHECK_THROWS_AS(provider.embed({"x"}), Error);
    CHECK(calls.load() == 1);
}

TEST_CASE("remote generation: 429 then success is retried; prompt is well-formed") {
    MockServer mock;
    std::atomic<int> calls{0};
    std::string captured_prompt;
    mock.server.Post("/v1/chat/completions",
                     [&](const httplib::Request& req, httplib::Response& res) {
                         int n = ++calls;
                         if (n == 1) {
                             res.status = 429;
                             res.set_content("slow down", "text/plain");
                             return;
                         }
                         auto body = json::parse(req.body);
                         CHECK(body["temperature"].get<double>() == 0.0);
                         captured_prompt = body["messages"][1]["content"].get<std::string>();
                         res.set_content(
                             json{{"choices",
                                   json::array({{{"message", {{"content", "mock answer"}}}}})}}
                                 .dump(),
                             "application/json");
                     });
    mock.start();

    components::RemoteGenerationProvider provider(test_config(mock));
    auto answer = provider.generate("what is up?", {"ctx one", "ctx two"});
    CHECK(answer == "mock answer");
    CHECK(calls.load() == 2);
    CHECK(captured_prompt.find("[1] ctx one") != std::string::npos);
    CHECK(captured_prompt.find("[2] ctx two") != std::string::npos);
    CHECK(captured_prompt.find("[1] ctx one") < captured_prompt.find("[2] ctx two"));
}

TEST_CASE("provider factory selects stub vs remote") {
    auto stub = components::make_embedding_provider(json{{"provider", "stub"}}, 16);
    CHECK(stub->embed({"x"}).at(0).size() == 16);
    CHECK_THROWS_AS(components::make_embedding_provider(json{{"provider", "nope"}}, 16), Error);
}
