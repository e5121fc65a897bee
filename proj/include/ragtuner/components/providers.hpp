#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ragtuner::components {

/// Deterministic feature-hashing embedding: lowercased, punctuation-stripped
/// tokens hash to a bucket in [0, dim) with a hash-derived sign, counts
/// accumulate, and the result is L2-normalized. dim must be >= 8.
std::vector<double> embed_stub_one(const std::string& text, std::size_t dim);
std::vector<std::vector<double>> embed_stub(const std::vector<std::string>& texts,
                                            std::size_t dim);

/// Extractive stub answerer: returns the context sentence with maximal
/// question-token overlap (normalized tokens; ties by earliest position).
std::string generate_stub(const std::string& question, const std::vector<std::string>& contexts);

/// The chat prompt sent by the remote generator (documented in docs/prompts.md).
std::string build_generation_prompt(const std::string& question,
                                    const std::vector<std::string>& contexts);

struct ProviderConfig {
    std::string base_url;       // e.g. http://host:port/v1
    std::string api_key;
    std::string model;
    std::size_t batch_size = 16;
    int timeout_ms = 30000;
    int max_attempts = 3;       // total attempts, exponential backoff between
    int backoff_ms = 250;
};

/// base_url/api_key default from RAGTUNER_BASE_URL / RAGTUNER_API_KEY.
ProviderConfig provider_config_from_env(const nlohmann::json& params);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

class GenerationProvider {
public:
    virtual ~GenerationProvider() = default;
    virtual std::string generate(const std::string& question,
                                 const std::vector<std::string>& contexts) = 0;
};

class StubEmbeddingProvider : public EmbeddingProvider {
public:
    explicit StubEmbeddingProvider(std::size_t dim) : dim_(dim) {}
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
        return embed_stub(texts, dim_);
    }

private:
    std::size_t dim_;
};

class StubGenerationProvider : public GenerationProvider {
public:
    std::string generate(const std::string& question,
                         const std::vector<std::string>& contexts) override {
        return generate_stub(question, contexts);
    }
};

/// OpenAI-compatible POST {base_url}/embeddings client with bounded batches
/// and retry on transient failures.
class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(ProviderConfig config) : config_(std::move(config)) {}
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

private:
    ProviderConfig config_;
};

/// OpenAI-compatible POST {base_url}/chat/completions client, temperature 0.
class RemoteGenerationProvider : public GenerationProvider {
public:
    explicit RemoteGenerationProvider(ProviderConfig config) : config_(std::move(config)) {}
    std::string generate(const std::string& question,
                         const std::vector<std::string>& contexts) override;

private:
    ProviderConfig config_;
};

/// params: {"provider":"stub"|"remote", "dim":..., "model":..., ...}
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const nlohmann::json& params,
                                                           std::size_t default_dim);
std::unique_ptr<GenerationProvider> make_generation_provider(const nlohmann::json& params);

}  // namespace ragtuner::components
