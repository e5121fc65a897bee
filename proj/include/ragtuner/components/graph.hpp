#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ragtuner/dem/element.hpp"
#include "ragtuner/dem/store.hpp"
#include "ragtuner/errors.hpp"
#include "ragtuner/text.hpp"

namespace ragtuner::components {

struct Triple {
    std::string subject;
    std::string relation;
    std::string object;
};

/// Extracts every "(subject; relation; object)" pattern, trimmed, in textual
/// order. Fixture corpora embed their relations this way.
std::vector<Triple> extract_triples(std::string_view text);

struct PprParams {
    double damping = 0.5;
    double tolerance = 1e-8;
    int max_iterations = 100;
    double link_threshold = 0.8;
};

/// Entity vertices plus the undirected pairs contributed by triple/synonym
/// edge elements. Vertex order is entity creation order.
struct EntityGraph {
    std::vector<dem::ElementId> vertices;
    std::map<dem::ElementId, std::size_t> vertex_index;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Personalized PageRank with restart distribution `seeds` (normalized,
/// nonempty). Walk matrix is column-stochastic over out-degree with every
/// edge expanded in both directions; dangling mass is redistributed to the
/// seeds. The result sums to 1.
std::map<dem::ElementId, double> ppr(const EntityGraph& graph,
                                     const std::map<dem::ElementId, double>& seeds,
                                     const PprParams& params);

template <typename StoreLike>
EntityGraph build_entity_graph(const StoreLike& store, const std::string& entities_domain,
                               const std::vector<std::string>& edge_domains) {
    EntityGraph graph;
    for (dem::ElementId id : store.domain(entities_domain).element_ids) {
        graph.vertex_index.emplace(id, graph.vertices.size());
        graph.vertices.push_back(id);
    }
    for (const auto& domain : edge_domains) {
        for (dem::ElementId id : store.domain(domain).element_ids) {
            const auto& children = store.element(id).children;
            if (children.size() != 2) continue;
            auto a = graph.vertex_index.find(children[0]);
            auto b = graph.vertex_index.find(children[1]);
            if (a == graph.vertex_index.end() || b == graph.vertex_index.end()) continue;
            graph.edges.emplace_back(a->second, b->second);
        }
    }
    return graph;
}

/// For every unordered pair of embedded entities with cosine >= threshold and
/// unequal normalized surfaces, creates one synonym edge element (children
/// ordered by id, similarity recorded as a prop). Returns the edge count.
template <typename StoreLike>
std::int64_t build_synonym_edges(StoreLike& store, const std::string& entities_domain,
                                 const std::string& synonyms_domain, double threshold) {
    const auto& dom = store.domain(entities_domain);
    if (!dom.indexed) {
        throw Error(ErrorCode::UnindexedDomain,
                    "entities domain '" + entities_domain + "' is not indexed");
    }
    struct Entry {
        dem::ElementId id;
        const std::vector<double>* embedding;
        std::string normalized;
    };
    std::vector<Entry> entries;
    for (dem::ElementId id : dom.element_ids) {
        const dem::Element& e = store.element(id);
        if (!e.embedding.has_value()) continue;
        std::string normalized;
        if (auto it = e.props.find("normalized"); it != e.props.end()) {
            normalized = std::get<std::string>(it->second);
        } else if (auto sit = e.props.find("surface"); sit != e.props.end()) {
            for (const auto& tok : text::normalized_tokens(std::get<std::string>(sit->second))) {
                if (!normalized.empty()) normalized.push_back(' ');
                normalized += tok;
            }
        }
        entries.push_back({id, &*e.embedding, std::move(normalized)});
    }
    std::int64_t count = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            if (entries[i].normalized == entries[j].normalized) continue;
            double sim = dem::cosine_similarity(*entries[i].embedding, *entries[j].embedding);
            if (sim < threshold) continue;
            dem::ElementId edge = store.create_element(
                synonyms_domain, dem::PropMap{{"similarity", dem::PropValue(sim)}});
            store.link(edge, entries[i].id);
            store.link(edge, entries[j].id);
            ++count;
        }
    }
    return count;
}

/// Each query-entity vector contributes its nearest stored entity when the
/// cosine clears link_threshold, with mass equal to that cosine; masses are
/// normalized to total 1. Empty when nothing clears the threshold.
template <typename StoreLike>
std::map<dem::ElementId, double> link_query_entities(
    const StoreLike& store, const std::string& entities_domain,
    const std::vector<std::vector<double>>& query_entity_vectors, double link_threshold) {
    std::map<dem::ElementId, double> seeds;
    double total = 0.0;
    for (const auto& v : query_entity_vectors) {
        auto matches = store.nearest(entities_domain, v, 1);
        if (matches.empty()) continue;
        if (matches[0].similarity < link_threshold) continue;
        seeds[matches[0].id] += matches[0].similarity;
        total += matches[0].similarity;
    }
    if (total <= 0.0) return {};
    for (auto& [_, mass] : seeds) mass /= total;
    return seeds;
}

/// Chunk score = sum of the scores of entities the chunk contains (via
/// parent pointers); descending, zero-score chunks excluded, ties by
/// creation order.
template <typename StoreLike>
std::vector<dem::ElementId> rank_chunks_by_ppr(const StoreLike& store,
                                               const std::map<dem::ElementId, double>& entity_scores,
                                               const std::string& chunks_domain) {
    std::map<dem::ElementId, double> chunk_scores;
    for (const auto& [entity, score] : entity_scores) {
        if (score <= 0.0) continue;
        for (dem::ElementId parent : store.element(entity).parents) {
            if (store.element(parent).domain == chunks_domain) {
                chunk_scores[parent] += score;
            }
        }
    }
    std::vector<std::pair<dem::ElementId, double>> ranked(chunk_scores.begin(),
                                                          chunk_scores.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<dem::ElementId> out;
    out.reserve(ranked.size());
    for (const auto& [id, _] : ranked) out.push_back(id);
    return out;
}

}  // namespace ragtuner::components
