#include "ragtuner/dsl/spec.hpp"
#include "ragtuner/runtime/registry.hpp"

namespace ragtuner::dsl {

std::vector<Diagnostic> validate_against_registry(const PipelineSpec& spec,
                                                  const runtime::ComponentRegistry& registry) {
    std::vector<Diagnostic> out;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const StageSpec& stage = spec.stages[i];
        const std::string pointer = "/stages/" + std::to_string(i);
        if (!registry.contains(stage.kind)) {
            std::string suggestion = registry.nearest_kind(stage.kind);
            std::string msg = "unknown component kind '" + stage.kind + "'";
            if (!suggestion.empty()) msg += "; did you mean '" + suggestion + "'?";
            out.push_back({"UnknownComponent", pointer + "/kind", msg});
            continue;
        }
        const runtime::Contract& contract = registry.contract(stage.kind);
        if (stage.inputs.size() != contract.input_arity) {
            out.push_back({"ContractMismatch", pointer + "/inputs",
                           "'" + stage.kind + "' declares " + std::to_string(stage.inputs.size()) +
                               " input domain(s), contract expects " +
                               std::to_string(contract.input_arity)});
        }
        if (stage.outputs.size() != contract.output_arity) {
            out.push_back({"ContractMismatch", pointer + "/outputs",
                           "'" + stage.kind + "' declares " + std::to_string(stage.outputs.size()) +
                               " output domain(s), contract expects " +
                               std::to_string(contract.output_arity)});
        }
    }
    return out;
}

}  // namespace ragtuner::dsl
