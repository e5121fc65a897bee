#include "ragtuner/components/providers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "ragtuner/errors.hpp"
#include "ragtuner/text.hpp"

namespace ragtuner::components {

using nlohmann::json;

std::vector<double> embed_stub_one(const std::string& text, std::size_t dim) {
    if (dim < 8) throw std::invalid_argument("embedding dim must be >= 8");
    std::vector<double> v(dim, 0.0);
    for (const auto& token : text::normalized_tokens(text)) {
        std::uint64_t h = text::fnv1a64(token);
        std::size_t idx = h % dim;
        double sign = (text::splitmix64(h) & 1ULL) ? 1.0 : -1.0;
        v[idx] += sign;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

std::vector<std::vector<double>> embed_stub(const std::vector<std::string>& texts,
                                            std::size_t dim) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_stub_one(t, dim));
    return out;
}

std::string generate_stub(const std::string& question, const std::vector<std::string>& contexts) {
    auto qtokens_vec = text::normalized_tokens(question);
    std::set<std::string> qtokens(qtokens_vec.begin(), qtokens_vec.end());
    std::string best;
    std::size_t best_overlap = 0;
    bool have_any = false;
    for (const auto& context : contexts) {
        for (const auto& sentence : text::split_sentences(context)) {
            std::set<std::string> stokens;
            for (auto& tok : text::normalized_tokens(sentence)) stokens.insert(std::move(tok));
            std::size_t overlap = 0;
            for (const auto& tok : stokens) overlap += qtokens.count(tok);
            if (!have_any || overlap > best_overlap) {
                have_any = true;
                best_overlap = overlap;
                best = sentence;
            }
        }
    }
    return best;
}

std::string build_generation_prompt(const std::string& question,
                                    const std::vector<std::string>& contexts) {
    std::ostringstream out;
    out << "Context:\n";
    if (contexts.empty()) {
        out << "(no context provided)\n";
    } else {
        for (std::size_t i = 0; i < contexts.size(); ++i) {
            out << "[" << (i + 1) << "] " << contexts[i] << "\n";
        }
    }
    out << "\nQuestion: " << question << "\nAnswer:";
    return out.str();
}

ProviderConfig provider_config_from_env(const json& params) {
    ProviderConfig config;
    if (const char* v = std::getenv("RAGTUNER_BASE_URL")) config.base_url = v;
    if (const char* v = std::getenv("RAGTUNER_API_KEY")) config.api_key = v;
    if (params.contains("base_url")) config.base_url = params["base_url"].get<std::string>();
    if (params.contains("model")) config.model = params["model"].get<std::string>();
    config.batch_size = params.value("batch_size", config.batch_size);
    config.timeout_ms = params.value("timeout_ms", config.timeout_ms);
    config.max_attempts = params.value("max_attempts", config.max_attempts);
    config.backoff_ms = params.value("backoff_ms", config.backoff_ms);
    return config;
}

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // leading path, no trailing slash
};

ParsedUrl split_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    std::size_t path_start =
        base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.origin = base_url;
    } else {
        out.origin = base_url.substr(0, path_start);
        out.path = base_url.substr(path_start);
    }
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    return out;
}

bool transient_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

json post_with_retries(const ProviderConfig& config, const std::string& endpoint,
                       const json& body) {
    if (config.base_url.empty()) {
        throw Error(ErrorCode::ProviderError,
                    "no base URL configured (set RAGTUNER_BASE_URL or the spec's base_url)");
    }
    ParsedUrl url = split_url(config.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(0, config.timeout_ms * 1000);
    client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
        if (attempt > 1) {
            int delay = config.backoff_ms << (attempt - 2);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        auto res = client.Post(url.path + endpoint, headers, payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            if (res.error() == httplib::Error::ConnectionTimeout ||
                res.error() == httplib::Error::Read) {
                if (attempt == config.max_attempts) {
                    throw Error(ErrorCode::Timeout, endpoint + ": " + last_error);
                }
            }
            continue;  // transient transport failure
        }
        if (res->status == 200) {
            try {
                return json::parse(res->body);
            } catch (const json::parse_error& ex) {
                throw Error(ErrorCode::ProviderError,
                            endpoint + ": unparsable response: " + ex.what());
            }
        }
        std::string excerpt = res->body.substr(0, 200);
        if (!transient_status(res->status)) {
            throw Error(ErrorCode::ProviderError,
                        endpoint + " status " + std::to_string(res->status) + ": " + excerpt);
        }
        last_error = "status " + std::to_string(res->status) + ": " + excerpt;
    }
    throw Error(ErrorCode::ProviderError,
                endpoint + " failed after " + std::to_string(config.max_attempts) +
                    " attempts: " + last_error);
}

}  // namespace

std::vector<std::vector<double>> RemoteEmbeddingProvider::embed(
    const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (std::size_t offset = 0; offset < texts.size(); offset += config_.batch_size) {
        std::size_t end = std::min(offset + config_.batch_size, texts.size());
        json body;
        body["model"] = config_.model;
        body["input"] = std::vector<std::string>(texts.begin() + offset, texts.begin() + end);
        json response = post_with_retries(config_, "/embeddings", body);
        if (!response.contains("data") || !response["data"].is_array() ||
            response["data"].size() != end - offset) {
            throw Error(ErrorCode::ProviderError, "/embeddings: malformed data array");
        }
        std::vector<json> data(response["data"].begin(), response["data"].end());
        std::stable_sort(data.begin(), data.end(), [](const json& a, const json& b) {
            return a.value("index", 0) < b.value("index", 0);
        });
        for (const auto& item : data) {
            out.push_back(item.at("embedding").get<std::vector<double>>());
        }
    }
    return out;
}

std::string RemoteGenerationProvider::generate(const std::string& question,
                                               const std::vector<std::string>& contexts) {
    json body;
    body["model"] = config_.model;
    body["temperature"] = 0;
    body["messages"] = json::array(
        {{{"role", "system"},
          {"content",
           "You answer questions from the provided context only. Reply with the answer span."}},
         {{"role", "user"}, {"content", build_generation_prompt(question, contexts)}}});
    json response = post_with_retries(config_, "/chat/completions", body);
    try {
        return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::ProviderError,
                    std::string("/chat/completions: malformed response: ") + ex.what());
    }
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const json& params,
                                                           std::size_t default_dim) {
    const std::string provider = params.value("provider", "stub");
    if (provider == "stub") {
        return std::make_unique<StubEmbeddingProvider>(params.value("dim", default_dim));
    }
    if (provider == "remote") {
        return std::make_unique<RemoteEmbeddingProvider>(provider_config_from_env(params));
    }
    throw Error(ErrorCode::ProviderError, "unknown embedding provider '" + provider + "'");
}

std::unique_ptr<GenerationProvider> make_generation_provider(const json& params) {
    const std::string provider = params.value("provider", "stub");
    if (provider == "stub") return std::make_unique<StubGenerationProvider>();
    if (provider == "remote") {
        return std::make_unique<RemoteGenerationProvider>(provider_config_from_env(params));
    }
    throw Error(ErrorCode::ProviderError, "unknown generation provider '" + provider + "'");
}

}  // namespace ragtuner::components
