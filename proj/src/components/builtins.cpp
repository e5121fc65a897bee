#include "ragtuner/components/builtins.hpp"

#include <algorithm>
#include <memory>

#include "ragtuner/components/chunker.hpp"
#include "ragtuner/components/graph.hpp"
#include "ragtuner/components/providers.hpp"
#include "ragtuner/errors.hpp"
#include "ragtuner/runtime/executor.hpp"
#include "ragtuner/text.hpp"

namespace ragtuner::components {

using dem::ElementId;
using dem::PropMap;
using dem::PropValue;
using nlohmann::json;
using runtime::Component;
using runtime::Contract;
using runtime::IndexContext;
using runtime::Phase;
using runtime::QueryContext;
using runtime::StoreView;

namespace {

json params_json(const dsl::StageSpec& stage) {
    json out = json::object();
    for (const auto& [key, pv] : stage.params) out[key] = pv.literal;
    return out;
}

std::string normalized_surface(const std::string& surface) {
    std::string out;
    for (const auto& tok : text::normalized_tokens(surface)) {
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

class Chunker : public Component {
public:
    Chunker(const dsl::StageSpec& stage, json params)
        : out_domain_(stage.outputs.at(0)),
          chunk_size_(params.value("chunk_size", 128)),
          overlap_ratio_(params.value("overlap_ratio", 0.0)) {}

    void run_index(StoreView& store, IndexContext& ctx) override {
        std::int64_t created = 0;
        for (const auto& doc : ctx.corpus) {
            for (const auto& span : chunk_spans(doc.text, chunk_size_, overlap_ratio_)) {
                PropMap props{
                    {"text", PropValue(chunk_text(doc.text, span))},
                    {"doc_id", PropValue(doc.doc_id)},
                    {"start_token", PropValue(static_cast<std::int64_t>(span.start_token))},
                    {"end_token", PropValue(static_cast<std::int64_t>(span.end_token))},
                };
                store.create_element(out_domain_, std::move(props));
                ++created;
            }
        }
        ctx.stats["chunks_created"] += created;
    }

private:
    std::string out_domain_;
    int chunk_size_;
    double overlap_ratio_;
};

class Embedder : public Component {
public:
    Embedder(const dsl::StageSpec& stage, json params)
        : domain_(stage.outputs.at(0)),
          text_prop_(params.value("text_prop", "text")),
          params_(std::move(params)) {}

    void run_index(StoreView& store, IndexContext& ctx) override {
        const auto& dom = store.domain(domain_);
        if (!dom.indexed) {
            throw Error(ErrorCode::UnindexedDomain,
                        "embedder target domain '" + domain_ + "' is not indexed");
        }
        auto provider = make_embedding_provider(params_, *dom.embedding_dim);
        std::vector<ElementId> ids;
        std::vector<std::string> texts;
        for (ElementId id : store.domain_elements(domain_)) {
            const dem::Element& e = store.element(id);
            if (e.embedding.has_value()) continue;
            auto it = e.props.find(text_prop_);
            if (it == e.props.end()) continue;
            ids.push_back(id);
            texts.push_back(std::get<std::string>(it->second));
        }
        auto vectors = provider->embed(texts);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            store.set_embedding(ids[i], std::move(vectors[i]));
        }
        ctx.stats["embedded_" + domain_] += static_cast<std::int64_t>(ids.size());
    }

private:
    std::string domain_;
    std::string text_prop_;
    json params_;
};

class TripleExtractor : public Component {
public:
    TripleExtractor(const dsl::StageSpec& stage, json params)
        : chunks_domain_(stage.inputs.at(0)),
          entities_domain_(stage.outputs.at(0)),
          triples_domain_(stage.outputs.at(1)),
          params_(std::move(params)) {}

    void run_index(StoreView& store, IndexContext& ctx) override {
        const auto& dom = store.domain(entities_domain_);
        std::unique_ptr<EmbeddingProvider> provider;
        if (dom.indexed) provider = make_embedding_provider(params_, *dom.embedding_dim);

        std::map<std::string, ElementId> by_normalized;
        std::int64_t triples_created = 0;
        auto entity_for = [&](const std::string& surface, ElementId chunk) {
            std::string normalized = normalized_surface(surface);
            auto it = by_normalized.find(normalized);
            ElementId id;
            if (it == by_normalized.end()) {
                id = store.create_element(entities_domain_,
                                          PropMap{{"surface", PropValue(surface)},
                                                  {"normalized", PropValue(normalized)}});
                if (provider) {
                    store.set_embedding(id, provider->embed({surface}).at(0));
                }
                by_normalized.emplace(std::move(normalized), id);
            } else {
                id = it->second;
            }
            store.link(chunk, id);  // chunk is the parent of the entities it mentions
            return id;
        };

        for (ElementId chunk : store.domain_elements(chunks_domain_)) {
            const dem::Element& e = store.element(chunk);
            auto it = e.props.find("text");
            if (it == e.props.end()) continue;
            for (const Triple& t : extract_triples(std::get<std::string>(it->second))) {
                ElementId subject = entity_for(t.subject, chunk);
                ElementId object = entity_for(t.object, chunk);
                if (subject == object) continue;
                ElementId edge = store.create_element(
                    triples_domain_,
                    PropMap{{"relation", PropValue(t.relation)},
                            {"source_chunk", PropValue(static_cast<std::int64_t>(chunk.value))}});
                store.link(edge, subject);
                store.link(edge, object);
                ++triples_created;
            }
        }
        ctx.stats["entities_created"] += static_cast<std::int64_t>(by_normalized.size());
        ctx.stats["triples_created"] += triples_created;
    }

private:
    std::string chunks_domain_;
    std::string entities_domain_;
    std::string triples_domain_;
    json params_;
};

class SynonymLinker : public Component {
public:
    SynonymLinker(const dsl::StageSpec& stage, json params)
        : entities_domain_(stage.inputs.at(0)),
          synonyms_domain_(stage.outputs.at(0)),
          threshold_(params.value("synonym_threshold", 0.9)) {}

    void run_index(StoreView& store, IndexContext& ctx) override {
        ctx.stats["synonym_edges"] +=
            build_synonym_edges(store, entities_domain_, synonyms_domain_, threshold_);
    }

private:
    std::string entities_domain_;
    std::string synonyms_domain_;
    double threshold_;
};

class VectorRetriever : public Component {
public:
    VectorRetriever(const dsl::StageSpec& stage, json params)
        : domain_(stage.inputs.at(0)),
          k_(params.value("k", 5)),
          emit_retrieved_(params.value("target", "retrieval") == "retrieval"),
          params_(std::move(params)) {}

    void run_query(const StoreView& store, QueryContext& ctx) const override {
        const auto& dom = store.domain(domain_);
        auto provider = make_embedding_provider(params_, *dom.embedding_dim);
        auto qvec = provider->embed({ctx.question}).at(0);
        auto matches = store.nearest(domain_, qvec, static_cast<std::size_t>(k_));
        if (emit_retrieved_) {
            ctx.retrieved.clear();
            for (const auto& m : matches) ctx.retrieved.push_back(m.id);
        }
        ctx.candidates[domain_] = std::move(matches);
    }

private:
    std::string domain_;
    int k_;
    bool emit_retrieved_;
    json params_;
};

class PprRetriever : public Component {
public:
    PprRetriever(const dsl::StageSpec& stage, json params)
        : entities_domain_(stage.inputs.at(0)),
          triples_domain_(stage.inputs.at(1)),
          synonyms_domain_(stage.inputs.at(2)),
          chunks_domain_(stage.inputs.at(3)),
          k_(params.value("k", 5)),
          params_(std::move(params)) {
        ppr_params_.damping = params_.value("damping", 0.5);
        ppr_params_.tolerance = params_.value("tolerance", 1e-8);
        ppr_params_.max_iterations = params_.value("max_iterations", 100);
        ppr_params_.link_threshold = params_.value("link_threshold", 0.8);
    }

    void run_query(const StoreView& store, QueryContext& ctx) const override {
        const auto& dom = store.domain(entities_domain_);
        auto provider = make_embedding_provider(params_, *dom.embedding_dim);

        // Query entities: structured pattern if present, else capitalized
        // runs, else the whole question.
        std::vector<std::string> surfaces;
        for (const Triple& t : extract_triples(ctx.question)) {
            surfaces.push_back(t.subject);
            surfaces.push_back(t.object);
        }
        if (surfaces.empty()) surfaces = text::capitalized_runs(ctx.question);
        if (surfaces.empty()) surfaces.push_back(ctx.question);

        auto seeds = link_query_entities(store, entities_domain_, provider->embed(surfaces),
                                         ppr_params_.link_threshold);
        ctx.retrieved.clear();
        if (seeds.empty()) {
            // Nothing cleared the threshold: fall back to vector retrieval
            // over the chunks domain.
            if (store.domain(chunks_domain_).indexed) {
                auto qvec = provider->embed({ctx.question}).at(0);
                for (const auto& m :
                     store.nearest(chunks_domain_, qvec, static_cast<std::size_t>(k_))) {
                    ctx.retrieved.push_back(m.id);
                }
            }
            return;
        }
        auto graph =
            build_entity_graph(store, entities_domain_, {triples_domain_, synonyms_domain_});
        auto scores = ppr(graph, seeds, ppr_params_);
        auto ranked = rank_chunks_by_ppr(store, scores, chunks_domain_);
        if (ranked.size() > static_cast<std::size_t>(k_)) ranked.resize(k_);
        ctx.retrieved = std::move(ranked);
    }

private:
    std::string entities_domain_;
    std::string triples_domain_;
    std::string synonyms_domain_;
    std::string chunks_domain_;
    int k_;
    PprParams ppr_params_;
    json params_;
};

class Generator : public Component {
public:
    Generator(const dsl::StageSpec& stage, json params)
        : chunks_domain_(stage.inputs.at(0)),
          context_k_(params.value("context_k", 5)),
          params_(std::move(params)) {}

    void run_query(const StoreView& store, QueryContext& ctx) const override {
        auto provider = make_generation_provider(params_);
        std::vector<std::string> contexts;
        for (ElementId id : ctx.retrieved) {
            if (contexts.size() >= static_cast<std::size_t>(context_k_)) break;
            const dem::Element& e = store.element(id);
            auto it = e.props.find("text");
            if (it != e.props.end()) {
                contexts.push_back(std::get<std::string>(it->second));
            }
        }
        ctx.answer = provider->generate(ctx.question, contexts);
    }

private:
    std::string chunks_domain_;
    int context_k_;
    json params_;
};

template <typename T>
runtime::ComponentFactory factory_for() {
    return [](const dsl::StageSpec& stage) -> std::unique_ptr<Component> {
        return std::make_unique<T>(stage, params_json(stage));
    };
}

}  // namespace

void register_builtins(runtime::ComponentRegistry& registry) {
    registry.register_kind("chunker", Contract{0, 1, Phase::Index}, factory_for<Chunker>());
    registry.register_kind("embedder", Contract{1, 1, Phase::Index}, factory_for<Embedder>());
    registry.register_kind("triple_extractor", Contract{1, 2, Phase::Index},
                           factory_for<TripleExtractor>());
    registry.register_kind("synonym_linker", Contract{1, 1, Phase::Index},
                           factory_for<SynonymLinker>());
    registry.register_kind("vector_retriever", Contract{1, 0, Phase::Query},
                           factory_for<VectorRetriever>());
    registry.register_kind("ppr_retriever", Contract{4, 0, Phase::Query},
                           factory_for<PprRetriever>());
    registry.register_kind("generator", Contract{1, 0, Phase::Query}, factory_for<Generator>());
}

runtime::ComponentRegistry builtin_registry() {
    runtime::ComponentRegistry registry;
    register_builtins(registry);
    return registry;
}

}  // namespace ragtuner::components
