#include "ragtuner/components/graph.hpp"

#include <cmath>

namespace ragtuner::components {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<Triple> extract_triples(std::string_view text) {
    std::vector<Triple> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t open = text.find('(', pos);
        if (open == std::string_view::npos) break;
        std::size_t close = text.find(')', open + 1);
        if (close == std::string_view::npos) break;
        std::size_t inner_open = text.rfind('(', close - 1);
        if (inner_open != open) {
            // nested '(' — restart from the innermost one
            pos = inner_open;
            continue;
        }
        std::string_view body = text.substr(open + 1, close - open - 1);
        std::size_t s1 = body.find(';');
        std::size_t s2 = s1 == std::string_view::npos ? std::string_view::npos
                                                      : body.find(';', s1 + 1);
        bool well_formed = s2 != std::string_view::npos &&
                           body.find(';', s2 + 1) == std::string_view::npos;
        if (well_formed) {
            Triple t{trim(body.substr(0, s1)), trim(body.substr(s1 + 1, s2 - s1 - 1)),
                     trim(body.substr(s2 + 1))};
            if (!t.subject.empty() && !t.relation.empty() && !t.object.empty()) {
                out.push_back(std::move(t));
            }
        }
        pos = close + 1;
    }
    return out;
}

std::map<dem::ElementId, double> ppr(const EntityGraph& graph,
                                     const std::map<dem::ElementId, double>& seeds,
                                     const PprParams& params) {
    if (seeds.empty()) {
        throw Error(ErrorCode::EmptySeeds, "personalized PageRank needs at least one seed");
    }
    const std::size_t n = graph.vertices.size();
    std::vector<double> p(n, 0.0);
    double seed_total = 0.0;
    for (const auto& [id, mass] : seeds) {
        auto it = graph.vertex_index.find(id);
        if (it == graph.vertex_index.end()) {
            throw Error(ErrorCode::EmptySeeds, "seed " + id.to_string() + " is not a vertex");
        }
        p[it->second] += mass;
        seed_total += mass;
    }
    if (seed_total <= 0.0) {
        throw Error(ErrorCode::EmptySeeds, "seed mass is zero");
    }
    for (double& x : p) x /= seed_total;

    // Undirected expansion: each edge contributes both walk directions.
    std::vector<std::vector<std::size_t>> out_edges(n);
    for (const auto& [a, b] : graph.edges) {
        out_edges[a].push_back(b);
        out_edges[b].push_back(a);
    }

    const double d = params.damping;
    std::vector<double> s = p;
    std::vector<double> next(n, 0.0);
    for (int iter = 0; iter < params.max_iterations; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        double dangling = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            if (out_edges[v].empty()) {
                dangling += s[v];
                continue;
            }
            double share = s[v] / static_cast<double>(out_edges[v].size());
            for (std::size_t to : out_edges[v]) next[to] += share;
        }
        double l1 = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            double value = d * (next[v] + dangling * p[v]) + (1.0 - d) * p[v];
            l1 += std::abs(value - s[v]);
            next[v] = value;
        }
        s.swap(next);
        if (l1 < params.tolerance) break;
    }

    std::map<dem::ElementId, double> scores;
    for (std::size_t v = 0; v < n; ++v) scores[graph.vertices[v]] = s[v];
    return scores;
}

}  // namespace ragtuner::components
