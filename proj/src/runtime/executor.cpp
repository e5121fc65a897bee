#include "ragtuner/runtime/executor.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ragtuner/errors.hpp"

namespace ragtuner::runtime {

using nlohmann::json;

Corpus load_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw Error(ErrorCode::IoError, "corpus directory not readable: " + dir);
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    Corpus corpus;
    for (const auto& path : files) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        corpus.push_back({path.stem().string(), buf.str()});
    }
    return corpus;
}

StoreView::StoreView(dem::DemStore& store, std::set<std::string> readable,
                     std::set<std::string> writable)
    : store_(store), readable_(std::move(readable)), writable_(std::move(writable)) {
    // Write access implies read access.
    readable_.insert(writable_.begin(), writable_.end());
}

void StoreView::check_readable(const dem::DomainName& domain) const {
    if (readable_.count(domain) == 0) {
        throw Error(ErrorCode::DomainAccessViolation,
                    "read of domain '" + domain + "' not declared by this stage");
    }
}

void StoreView::check_writable(const dem::DomainName& domain) const {
    if (writable_.count(domain) == 0) {
        throw Error(ErrorCode::DomainAccessViolation,
                    "write to domain '" + domain + "' not declared by this stage");
    }
}

dem::ElementId StoreView::create_element(const dem::DomainName& domain, dem::PropMap props,
                                         double weight) {
    check_writable(domain);
    return store_.create_element(domain, std::move(props), weight);
}

void StoreView::link(dem::ElementId parent, dem::ElementId child) {
    const dem::Element& p = store_.element(parent);
    const dem::Element& c = store_.element(child);
    check_readable(p.domain);
    check_readable(c.domain);
    // Materializing a declared relation needs write intent on either endpoint.
    if (writable_.count(p.domain) == 0 && writable_.count(c.domain) == 0) {
        throw Error(ErrorCode::DomainAccessViolation,
                    "link between '" + p.domain + "' and '" + c.domain +
                        "' requires write access to one of them");
    }
    store_.link(parent, child);
}

void StoreView::set_embedding(dem::ElementId e, std::vector<double> v) {
    check_writable(store_.element(e).domain);
    store_.set_embedding(e, std::move(v));
}

const dem::Element& StoreView::element(dem::ElementId e) const {
    const dem::Element& el = store_.element(e);
    check_readable(el.domain);
    return el;
}

bool StoreView::has_element(dem::ElementId e) const { return store_.has_element(e); }

std::vector<dem::ElementId> StoreView::hyperedge_members(dem::ElementId e) const {
    return element(e).children;
}

const std::vector<dem::ElementId>& StoreView::domain_elements(
    const dem::DomainName& domain) const {
    check_readable(domain);
    return store_.domain(domain).element_ids;
}

const dem::Domain& StoreView::domain(const dem::DomainName& name) const {
    check_readable(name);
    return store_.domain(name);
}

bool StoreView::has_domain(const std::string& name) const { return store_.has_domain(name); }

std::vector<dem::Neighbor> StoreView::nearest(const dem::DomainName& domain,
                                              std::span<const double> query,
                                              std::size_t k) const {
    check_readable(domain);
    return store_.nearest(domain, query, k);
}

Pipeline build_pipeline(const ComponentRegistry& registry, const dsl::PipelineSpec& spec) {
    if (!spec.concrete()) {
        throw Error(ErrorCode::UnresolvedTunable,
                    "spec still declares " + std::to_string(spec.tunables.size()) +
                        " tunable(s); apply an assignment first");
    }
    auto diagnostics = dsl::validate_against_registry(spec, registry);
    if (!diagnostics.empty()) {
        const auto& d = diagnostics.front();
        ErrorCode code = d.code == "UnknownComponent" ? ErrorCode::UnknownComponent
                                                      : ErrorCode::ContractMismatch;
        throw Error(code, d.pointer + " " + d.message);
    }
    Pipeline pipeline;
    pipeline.domains = spec.domains;
    pipeline.relations = spec.relations;
    for (const auto& stage : spec.stages) {
        StageInstance instance;
        instance.stage = stage;
        instance.contract = registry.contract(stage.kind);
        instance.component = registry.instantiate(stage);
        auto& bucket = instance.contract.phase == Phase::Index ? pipeline.index_stages
                                                               : pipeline.query_stages;
        bucket.push_back(std::move(instance));
    }
    return pipeline;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::set<std::string> as_set(const std::vector<std::string>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

RunResult run_pipeline(const Pipeline& pipeline, const Corpus& corpus,
                       const std::vector<Query>& queries, dem::DemStore& store) {
    RunResult result;
    for (const auto& decl : pipeline.domains) {
        if (!store.has_domain(decl.name)) {
            store.create_domain(decl.name, decl.indexed, decl.dim);
        }
    }

    std::map<std::string, json> run_scratch;
    IndexContext index_ctx{corpus, run_scratch, result.index_stats};
    for (const auto& stage : pipeline.index_stages) {
        StoreView view(store, as_set(stage.stage.inputs), as_set(stage.stage.outputs));
        auto start = std::chrono::steady_clock::now();
        try {
            stage.component->run_index(view, index_ctx);
        } catch (const Error& ex) {
            if (ex.code() == ErrorCode::DomainAccessViolation) throw;
            throw Error(ErrorCode::StageFailure, "stage '" + stage.stage.name + "': " + ex.what());
        } catch (const std::exception& ex) {
            throw Error(ErrorCode::StageFailure, "stage '" + stage.stage.name + "': " + ex.what());
        }
        result.index_timings_ms[stage.stage.name] = elapsed_ms(start);
    }

    // The store is frozen from here on; check integrity once between phases.
    auto violations = store.validate();
    if (!violations.empty()) {
        throw Error(ErrorCode::StageFailure,
                    "store integrity violated after index phase: " + violations.front().rule +
                        " (" + violations.front().message + ")");
    }
    for (const auto& rel : pipeline.relations) {
        bool materialized = false;
        if (store.has_domain(rel.parent)) {
            for (dem::ElementId id : store.domain(rel.parent).element_ids) {
                for (dem::ElementId child : store.element(id).children) {
                    if (store.element(child).domain == rel.child) {
                        materialized = true;
                        break;
                    }
                }
                if (materialized) break;
            }
        }
        if (!materialized) {
            result.warnings.push_back("declared relation " + rel.parent + " -> " + rel.child +
                                      " was never materialized by any stage");
        }
    }

    for (const auto& query : queries) {
        QueryContext ctx{query.qid, query.question, run_scratch, {}, {}, {}};
        QueryRecord record;
        record.qid = query.qid;
        for (const auto& stage : pipeline.query_stages) {
            // No write grants in the query phase.
            StoreView view(store, as_set(stage.stage.inputs), {});
            auto start = std::chrono::steady_clock::now();
            try {
                stage.component->run_query(view, ctx);
            } catch (const Error& ex) {
                if (ex.code() == ErrorCode::DomainAccessViolation) throw;
                throw Error(ErrorCode::StageFailure,
                            "stage '" + stage.stage.name + "' on query '" + query.qid +
                                "': " + ex.what());
            } catch (const std::exception& ex) {
                throw Error(ErrorCode::StageFailure,
                            "stage '" + stage.stage.name + "' on query '" + query.qid +
                                "': " + ex.what());
            }
            record.timings_ms[stage.stage.name] = elapsed_ms(start);
        }
        record.retrieved = ctx.retrieved;
        for (dem::ElementId id : ctx.retrieved) {
            const dem::Element& e = store.element(id);
            auto it = e.props.find("doc_id");
            if (it != e.props.end() && std::holds_alternative<std::string>(it->second)) {
                record.retrieved_keys.push_back(std::get<std::string>(it->second));
            } else {
                record.retrieved_keys.push_back(id.to_string());
            }
        }
        record.answer = ctx.answer;
        result.records.push_back(std::move(record));
    }

    if (auto it = run_scratch.find("objective_override");
        it != run_scratch.end() && it->second.is_number()) {
        result.objective_override = it->second.get<double>();
    }

    violations = store.validate();
    if (!violations.empty()) {
        throw Error(ErrorCode::StageFailure,
                    "store integrity violated after run: " + violations.front().rule);
    }
    return result;
}

std::string run_result_jsonl(const RunResult& run, bool include_timings) {
    std::ostringstream out;
    for (const auto& record : run.records) {
        json rec;
        rec["qid"] = record.qid;
        json retrieved = json::array();
        for (dem::ElementId id : record.retrieved) retrieved.push_back(id.value);
        rec["retrieved"] = std::move(retrieved);
        rec["retrieved_keys"] = record.retrieved_keys;
        rec["answer"] = record.answer;
        if (include_timings) rec["timings_ms"] = record.timings_ms;
        out << rec.dump() << '\n';
    }
    return out.str();
}

}  // namespace ragtuner::runtime
