#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ragtuner::runtime {
class ComponentRegistry;
}

namespace ragtuner::dsl {

using json = nlohmann::json;

enum class TunableKind { Float, Int, Categorical };

struct TunableDecl {
    std::string path;  // "<stage name>.<param key>"
    TunableKind kind = TunableKind::Float;
    double low = 0.0;    // float/int bounds, inclusive
    double high = 0.0;
    std::vector<json> choices;  // categorical, declaration order
    json default_value;
};

/// A stage parameter: either a literal JSON scalar or a reference to a
/// declared tunable (resolved by apply_assignment).
struct ParamValue {
    json literal;
    int tunable_index = -1;  // >= 0 when this is a TunableRef

    bool is_tunable() const { return tunable_index >= 0; }
};

struct StageSpec {
    std::string kind;
    std::string name;
    std::map<std::string, ParamValue> params;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

struct DomainDecl {
    std::string name;
    bool indexed = false;
    std::optional<std::size_t> dim;
};

struct RelationDecl {
    std::string parent;
    std::string child;
};

struct TunerSettings {
    double recall_weight = 0.5;
    double f1_weight = 0.5;
    int k = 5;
    int n_init = 0;  // 0 = auto: max(5, 2 * encoded dims)
    int patience = 5;
    double xi = 0.01;
    int candidates = 1024;
    int perturbations = 64;
    double perturb_std = 0.05;
};

struct PipelineSpec {
    std::string name;
    std::optional<std::string> corpus;  // path, relative to the spec file
    std::vector<DomainDecl> domains;
    std::vector<RelationDecl> relations;
    std::vector<StageSpec> stages;
    std::vector<TunableDecl> tunables;  // discovery order
    TunerSettings tuner;
    std::string base_dir;  // directory of the source file, "" when parsed from text

    bool concrete() const { return tunables.empty(); }
};

/// One concrete value per tunable path.
using Assignment = std::map<std::string, json>;

struct Diagnostic {
    std::string code;     // "UnknownComponent", "ContractMismatch", ...
    std::string pointer;  // JSON pointer into the spec document
    std::string message;
};

PipelineSpec parse_spec(const std::string& text);
PipelineSpec parse_spec_file(const std::string& path);

std::vector<Diagnostic> validate_against_registry(const PipelineSpec& spec,
                                                  const runtime::ComponentRegistry& registry);

/// Substitutes assignment values for every TunableRef; the input is unchanged.
PipelineSpec apply_assignment(const PipelineSpec& spec, const Assignment& assignment);

Assignment defaults(const PipelineSpec& spec);

/// Deterministic key-sorted, 2-space-indented rendering; parsing it back
/// yields a structurally equal spec.
std::string canonical_form(const PipelineSpec& spec);

bool structurally_equal(const PipelineSpec& a, const PipelineSpec& b);

/// Throws Error(OutOfBounds) unless the value satisfies the declaration.
void check_value(const TunableDecl& decl, const json& value);

const char* tunable_kind_name(TunableKind kind);

}  // namespace ragtuner::dsl
