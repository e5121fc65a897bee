#include "ragtuner/runtime/registry.hpp"

#include <algorithm>

#include "ragtuner/errors.hpp"

namespace ragtuner::runtime {

void Component::run_index(StoreView&, IndexContext&) {}
void Component::run_query(const StoreView&, QueryContext&) const {}

void ComponentRegistry::register_kind(const std::string& kind, Contract contract,
                                      ComponentFactory factory) {
    if (entries_.count(kind) > 0) {
        throw Error(ErrorCode::DuplicateKind, "component kind '" + kind + "' already registered");
    }
    entries_.emplace(kind, Entry{contract, std::move(factory)});
}

const Contract& ComponentRegistry::contract(const std::string& kind) const {
    auto it = entries_.find(kind);
    if (it == entries_.end()) {
        throw Error(ErrorCode::UnknownComponent, "no component kind '" + kind + "'");
    }
    return it->second.contract;
}

std::unique_ptr<Component> ComponentRegistry::instantiate(
    const dsl::StageSpec& concrete_stage) const {
    auto it = entries_.find(concrete_stage.kind);
    if (it == entries_.end()) {
        throw Error(ErrorCode::UnknownComponent, "no component kind '" + concrete_stage.kind + "'");
    }
    return it->second.factory(concrete_stage);
}

std::vector<std::string> ComponentRegistry::kinds() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [kind, _] : entries_) out.push_back(kind);
    return out;
}

std::string ComponentRegistry::nearest_kind(const std::string& kind) const {
    std::string best;
    std::size_t best_dist = std::string::npos;
    for (const auto& [candidate, _] : entries_) {
        std::size_t d = edit_distance(kind, candidate);
        if (d < best_dist) {
            best_dist = d;
            best = candidate;
        }
    }
    return best;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace ragtuner::runtime
