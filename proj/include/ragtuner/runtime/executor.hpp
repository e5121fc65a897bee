#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragtuner/dem/store.hpp"
#include "ragtuner/runtime/registry.hpp"

namespace ragtuner::runtime {

struct Document {
    std::string doc_id;
    std::string text;
};

using Corpus = std::vector<Document>;

/// Reads every regular file in `dir` (sorted by filename); doc_id is the stem.
Corpus load_corpus(const std::string& dir);

struct Query {
    std::string qid;
    std::string question;
};

/// Domain-scoped gate in front of the DemStore. Components see only the
/// domains their stage declared; the executor drops all write grants for the
/// query phase, freezing the store between phases.
class StoreView {
public:
    StoreView(dem::DemStore& store, std::set<std::string> readable,
              std::set<std::string> writable);

    dem::ElementId create_element(const dem::DomainName& domain, dem::PropMap props,
                                  double weight = 1.0);
    void link(dem::ElementId parent, dem::ElementId child);
    void set_embedding(dem::ElementId e, std::vector<double> v);

    const dem::Element& element(dem::ElementId e) const;
    bool has_element(dem::ElementId e) const;
    std::vector<dem::ElementId> hyperedge_members(dem::ElementId e) const;
    const std::vector<dem::ElementId>& domain_elements(const dem::DomainName& domain) const;
    const dem::Domain& domain(const dem::DomainName& name) const;
    bool has_domain(const std::string& name) const;
    std::vector<dem::Neighbor> nearest(const dem::DomainName& domain,
                                       std::span<const double> query, std::size_t k) const;

private:
    void check_readable(const dem::DomainName& domain) const;
    void check_writable(const dem::DomainName& domain) const;

    dem::DemStore& store_;
    std::set<std::string> readable_;
    std::set<std::string> writable_;
};

struct IndexContext {
    const Corpus& corpus;
    /// Run-level key-value bus for non-element artifacts.
    std::map<std::string, nlohmann::json>& run_scratch;
    /// Per-stage counters surfaced in the run log (e.g. edges created).
    std::map<std::string, std::int64_t>& stats;
};

struct QueryContext {
    std::string qid;
    std::string question;
    const std::map<std::string, nlohmann::json>& run_scratch;
    /// Ranked matches per domain, written by retriever stages.
    std::map<std::string, std::vector<dem::Neighbor>> candidates;
    /// Final ranked retrieval (chunk ids) and the generated answer.
    std::vector<dem::ElementId> retrieved;
    std::string answer;
};

struct QueryRecord {
    std::string qid;
    std::vector<dem::ElementId> retrieved;
    std::vector<std::string> retrieved_keys;  // passage keys (doc_id prop), same rank
    std::string answer;
    std::map<std::string, double> timings_ms;
};

struct RunResult {
    std::vector<QueryRecord> records;
    std::map<std::string, double> index_timings_ms;
    std::map<std::string, std::int64_t> index_stats;
    std::vector<std::string> warnings;
    std::optional<double> objective_override;
};

/// One JSONL record per query: {"qid","retrieved","retrieved_keys","answer","timings_ms"}.
std::string run_result_jsonl(const RunResult& run, bool include_timings = true);

struct StageInstance {
    dsl::StageSpec stage;
    Contract contract;
    std::unique_ptr<Component> component;
};

struct Pipeline {
    std::vector<StageInstance> index_stages;
    std::vector<StageInstance> query_stages;
    std::vector<dsl::DomainDecl> domains;
    std::vector<dsl::RelationDecl> relations;
};

/// Requires a concrete (zero-tunable) spec validating cleanly against the
/// registry; stage order is preserved within each phase.
Pipeline build_pipeline(const ComponentRegistry& registry, const dsl::PipelineSpec& spec);

RunResult run_pipeline(const Pipeline& pipeline, const Corpus& corpus,
                       const std::vector<Query>& queries, dem::DemStore& store);

}  // namespace ragtuner::runtime
