#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ragtuner/dsl/spec.hpp"

namespace ragtuner::runtime {

class StoreView;
struct IndexContext;
struct QueryContext;

enum class Phase { Index, Query };

/// Unified stage contract: how many input/output domains a component kind
/// declares, and which execution phase it belongs to.
struct Contract {
    std::size_t input_arity = 0;
    std::size_t output_arity = 0;
    Phase phase = Phase::Index;
};

/// Unified component interface. Index-phase components run once over the
/// corpus; query-phase components run once per query. The executor calls the
/// hook matching the registered contract's phase.
class Component {
public:
    virtual ~Component() = default;
    virtual void run_index(StoreView& store, IndexContext& ctx);
    virtual void run_query(const StoreView& store, QueryContext& ctx) const;
};

using ComponentFactory =
    std::function<std::unique_ptr<Component>(const dsl::StageSpec& concrete_stage)>;

class ComponentRegistry {
public:
    void register_kind(const std::string& kind, Contract contract, ComponentFactory factory);

    bool contains(const std::string& kind) const { return entries_.count(kind) > 0; }
    const Contract& contract(const std::string& kind) const;
    std::unique_ptr<Component> instantiate(const dsl::StageSpec& concrete_stage) const;

    std::vector<std::string> kinds() const;

    /// Closest registered kind by edit distance, for typo diagnostics.
    std::string nearest_kind(const std::string& kind) const;

private:
    struct Entry {
        Contract contract;
        ComponentFactory factory;
    };
    std::map<std::string, Entry> entries_;
};

std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace ragtuner::runtime
