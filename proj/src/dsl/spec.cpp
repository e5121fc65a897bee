#include "ragtuner/dsl/spec.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ragtuner/errors.hpp"

namespace ragtuner::dsl {

namespace {

[[noreturn]] void schema_error(const std::string& pointer, const std::string& message) {
    throw Error(ErrorCode::SchemaError, pointer + " " + message);
}

void require_keys(const json& obj, const std::string& pointer,
                  const std::set<std::string>& required, const std::set<std::string>& optional) {
    for (const auto& [key, _] : obj.items()) {
        if (required.count(key) == 0 && optional.count(key) == 0) {
            schema_error(pointer + "/" + key, "unknown key");
        }
    }
    for (const auto& key : required) {
        if (!obj.contains(key)) schema_error(pointer, "missing required key '" + key + "'");
    }
}

bool is_scalar(const json& j) {
    return j.is_string() || j.is_number() || j.is_boolean();
}

TunableDecl parse_tunable(const json& t, const std::string& path, const std::string& pointer) {
    require_keys(t, pointer, {"kind"}, {"low", "high", "default", "choices"});
    TunableDecl decl;
    decl.path = path;
    const std::string kind = t.at("kind").get<std::string>();
    if (kind == "float") {
        decl.kind = TunableKind::Float;
    } else if (kind == "int") {
        decl.kind = TunableKind::Int;
    } else if (kind == "categorical") {
        decl.kind = TunableKind::Categorical;
    } else {
        schema_error(pointer + "/kind", "expected float, int or categorical, got '" + kind + "'");
    }

    if (decl.kind == TunableKind::Categorical) {
        if (!t.contains("choices") || !t["choices"].is_array() || t["choices"].size() < 2) {
            schema_error(pointer + "/choices", "categorical tunable needs >= 2 choices");
        }
        for (const auto& c : t["choices"]) {
            if (!is_scalar(c)) schema_error(pointer + "/choices", "choices must be scalars");
            if (std::count(decl.choices.begin(), decl.choices.end(), c) > 0) {
                schema_error(pointer + "/choices", "duplicate choice " + c.dump());
            }
            decl.choices.push_back(c);
        }
        if (!t.contains("default")) schema_error(pointer, "missing default");
        decl.default_value = t["default"];
    } else {
        for (const char* key : {"low", "high", "default"}) {
            if (!t.contains(key) || !t[key].is_number()) {
                schema_error(pointer, std::string("missing numeric '") + key + "'");
            }
            if (decl.kind == TunableKind::Int && !t[key].is_number_integer()) {
                schema_error(pointer + "/" + key, "int tunable bounds must be integers");
            }
        }
        decl.low = t["low"].get<double>();
        decl.high = t["high"].get<double>();
        if (!(decl.low < decl.high)) schema_error(pointer, "low must be < high");
        decl.default_value = t["default"];
    }
    try {
        check_value(decl, decl.default_value);
    } catch (const Error&) {
        schema_error(pointer + "/default", "default outside bounds/choices");
    }
    return decl;
}

json tunable_to_json(const TunableDecl& decl) {
    json t;
    switch (decl.kind) {
        case TunableKind::Float: t["kind"] = "float"; break;
        case TunableKind::Int: t["kind"] = "int"; break;
        case TunableKind::Categorical: t["kind"] = "categorical"; break;
    }
    if (decl.kind == TunableKind::Categorical) {
        t["choices"] = decl.choices;
    } else if (decl.kind == TunableKind::Int) {
        t["low"] = static_cast<std::int64_t>(decl.low);
        t["high"] = static_cast<std::int64_t>(decl.high);
    } else {
        t["low"] = decl.low;
        t["high"] = decl.high;
    }
    t["default"] = decl.default_value;
    return t;
}

struct LineCol {
    std::size_t line = 1;
    std::size_t col = 1;
};

LineCol offset_to_line_col(const std::string& text, std::size_t byte) {
    LineCol lc;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++lc.line;
            lc.col = 1;
        } else {
            ++lc.col;
        }
    }
    return lc;
}

}  // namespace

const char* tunable_kind_name(TunableKind kind) {
    switch (kind) {
        case TunableKind::Float: return "float";
        case TunableKind::Int: return "int";
        case TunableKind::Categorical: return "categorical";
    }
    return "?";
}

void check_value(const TunableDecl& decl, const json& value) {
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::OutOfBounds, decl.path + ": " + value.dump() + " " + why);
    };
    switch (decl.kind) {
        case TunableKind::Float: {
            if (!value.is_number()) fail("is not a number");
            double v = value.get<double>();
            if (v < decl.low || v > decl.high) {
                fail("outside [" + std::to_string(decl.low) + ", " + std::to_string(decl.high) + "]");
            }
            break;
        }
        case TunableKind::Int: {
            if (!value.is_number_integer()) fail("is not an integer");
            double v = value.get<double>();
            if (v < decl.low || v > decl.high) fail("outside bounds");
            break;
        }
        case TunableKind::Categorical: {
            if (std::count(decl.choices.begin(), decl.choices.end(), value) == 0) {
                fail("is not one of the declared choices");
            }
            break;
        }
    }
}

PipelineSpec parse_spec(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& ex) {
        LineCol lc = offset_to_line_col(text, ex.byte > 0 ? ex.byte - 1 : 0);
        throw Error(ErrorCode::SyntaxError, "line " + std::to_string(lc.line) + ", col " +
                                                std::to_string(lc.col) + ": " + ex.what());
    }
    if (!doc.is_object()) schema_error("", "top level must be an object");
    require_keys(doc, "", {"name", "domains", "stages"}, {"corpus", "tuner"});

    PipelineSpec spec;
    if (!doc["name"].is_string()) schema_error("/name", "must be a string");
    spec.name = doc["name"].get<std::string>();
    if (doc.contains("corpus")) {
        if (!doc["corpus"].is_string()) schema_error("/corpus", "must be a string");
        spec.corpus = doc["corpus"].get<std::string>();
    }

    if (!doc["domains"].is_array()) schema_error("/domains", "must be an array");
    std::set<std::string> domain_names;
    for (std::size_t i = 0; i < doc["domains"].size(); ++i) {
        const json& d = doc["domains"][i];
        const std::string pointer = "/domains/" + std::to_string(i);
        if (!d.is_object()) schema_error(pointer, "must be an object");
        if (d.contains("parent_of")) {
            require_keys(d, pointer, {"parent_of"}, {});
            const json& rel = d["parent_of"];
            require_keys(rel, pointer + "/parent_of", {"parent", "child"}, {});
            spec.relations.push_back(
                {rel["parent"].get<std::string>(), rel["child"].get<std::string>()});
            continue;
        }
        require_keys(d, pointer, {"name"}, {"indexed", "dim"});
        DomainDecl decl;
        decl.name = d["name"].get<std::string>();
        decl.indexed = d.value("indexed", false);
        if (d.contains("dim")) {
            if (!d["dim"].is_number_integer() || d["dim"].get<std::int64_t>() <= 0) {
                schema_error(pointer + "/dim", "must be a positive integer");
            }
            decl.dim = d["dim"].get<std::size_t>();
        }
        if (decl.indexed && !decl.dim) schema_error(pointer, "indexed domain needs 'dim'");
        if (!domain_names.insert(decl.name).second) {
            schema_error(pointer + "/name", "duplicate domain '" + decl.name + "'");
        }
        spec.domains.push_back(std::move(decl));
    }
    if (spec.domains.empty()) schema_error("/domains", "at least one domain declaration required");
    for (std::size_t i = 0; i < spec.relations.size(); ++i) {
        const auto& rel = spec.relations[i];
        for (const std::string& side : {rel.parent, rel.child}) {
            if (domain_names.count(side) == 0) {
                schema_error("/domains", "parent_of references undeclared domain '" + side + "'");
            }
        }
    }

    if (!doc["stages"].is_array() || doc["stages"].empty()) {
        schema_error("/stages", "must be a non-empty array");
    }
    std::set<std::string> tunable_paths;
    for (std::size_t i = 0; i < doc["stages"].size(); ++i) {
        const json& s = doc["stages"][i];
        const std::string pointer = "/stages/" + std::to_string(i);
        if (!s.is_object()) schema_error(pointer, "must be an object");
        require_keys(s, pointer, {"kind", "name"}, {"params", "inputs", "outputs"});
        StageSpec stage;
        stage.kind = s["kind"].get<std::string>();
        if (stage.kind.empty()) schema_error(pointer + "/kind", "must be non-empty");
        stage.name = s["name"].get<std::string>();
        if (stage.name.empty()) schema_error(pointer + "/name", "must be non-empty");
        for (const char* side : {"inputs", "outputs"}) {
            if (!s.contains(side)) continue;
            if (!s[side].is_array()) schema_error(pointer + "/" + side, "must be an array");
            for (const auto& dom : s[side]) {
                const std::string name = dom.get<std::string>();
                if (domain_names.count(name) == 0) {
                    schema_error(pointer + "/" + side,
                                 "stage references undeclared domain '" + name + "'");
                }
                (std::string(side) == "inputs" ? stage.inputs : stage.outputs).push_back(name);
            }
        }
        if (s.contains("params")) {
            if (!s["params"].is_object()) schema_error(pointer + "/params", "must be an object");
            for (const auto& [key, value] : s["params"].items()) {
                ParamValue pv;
                if (value.is_object() && value.contains("$tune")) {
                    const std::string tp = pointer + "/params/" + key + "/$tune";
                    const std::string path = stage.name + "." + key;
                    if (!tunable_paths.insert(path).second) {
                        throw Error(ErrorCode::DuplicateTunablePath, path);
                    }
                    pv.tunable_index = static_cast<int>(spec.tunables.size());
                    spec.tunables.push_back(parse_tunable(value["$tune"], path, tp));
                } else if (is_scalar(value)) {
                    pv.literal = value;
                } else {
                    schema_error(pointer + "/params/" + key,
                                 "must be a scalar literal or a {\"$tune\": ...} marker");
                }
                stage.params.emplace(key, std::move(pv));
            }
        }
        spec.stages.push_back(std::move(stage));
    }

    // Stage order must be a valid topological order over domain dependencies.
    std::map<std::string, std::size_t> first_producer;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        for (const auto& out : spec.stages[i].outputs) {
            if (first_producer.count(out) == 0) first_producer[out] = i;
        }
    }
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        for (const auto& in : spec.stages[i].inputs) {
            auto it = first_producer.find(in);
            if (it != first_producer.end() && it->second > i) {
                schema_error("/stages/" + std::to_string(i),
                             "stage '" + spec.stages[i].name + "' consumes domain '" + in +
                                 "' which is only produced later in the pipeline");
            }
        }
    }

    if (doc.contains("tuner")) {
        const json& t = doc["tuner"];
        const std::string pointer = "/tuner";
        require_keys(t, pointer, {},
                     {"objective", "n_init", "patience", "xi", "candidates", "perturbations",
                      "perturb_std"});
        if (t.contains("objective")) {
            const json& o = t["objective"];
            require_keys(o, pointer + "/objective", {}, {"recall_weight", "f1_weight", "k"});
            spec.tuner.recall_weight = o.value("recall_weight", spec.tuner.recall_weight);
            spec.tuner.f1_weight = o.value("f1_weight", spec.tuner.f1_weight);
            spec.tuner.k = o.value("k", spec.tuner.k);
            if (spec.tuner.recall_weight < 0 || spec.tuner.f1_weight < 0) {
                schema_error(pointer + "/objective", "weights must be nonnegative");
            }
            if (spec.tuner.k <= 0) schema_error(pointer + "/objective/k", "must be positive");
        }
        spec.tuner.n_init = t.value("n_init", spec.tuner.n_init);
        spec.tuner.patience = t.value("patience", spec.tuner.patience);
        spec.tuner.xi = t.value("xi", spec.tuner.xi);
        spec.tuner.candidates = t.value("candidates", spec.tuner.candidates);
        spec.tuner.perturbations = t.value("perturbations", spec.tuner.perturbations);
        spec.tuner.perturb_std = t.value("perturb_std", spec.tuner.perturb_std);
    }
    return spec;
}

PipelineSpec parse_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    PipelineSpec spec = parse_spec(buf.str());
    spec.base_dir = std::filesystem::path(path).parent_path().string();
    return spec;
}

PipelineSpec apply_assignment(const PipelineSpec& spec, const Assignment& assignment) {
    for (const auto& [path, _] : assignment) {
        bool known = std::any_of(spec.tunables.begin(), spec.tunables.end(),
                                 [&](const TunableDecl& d) { return d.path == path; });
        if (!known) {
            throw Error(ErrorCode::MissingAssignment,
                        "assignment names unknown tunable path '" + path + "'");
        }
    }
    PipelineSpec out = spec;
    for (const auto& decl : spec.tunables) {
        auto it = assignment.find(decl.path);
        if (it == assignment.end()) {
            throw Error(ErrorCode::MissingAssignment, decl.path);
        }
        check_value(decl, it->second);
    }
    for (auto& stage : out.stages) {
        for (auto& [key, pv] : stage.params) {
            if (!pv.is_tunable()) continue;
            const TunableDecl& decl = spec.tunables.at(pv.tunable_index);
            pv.literal = assignment.at(decl.path);
            pv.tunable_index = -1;
        }
    }
    out.tunables.clear();
    return out;
}

Assignment defaults(const PipelineSpec& spec) {
    Assignment a;
    for (const auto& decl : spec.tunables) a[decl.path] = decl.default_value;
    return a;
}

std::string canonical_form(const PipelineSpec& spec) {
    json doc;
    doc["name"] = spec.name;
    if (spec.corpus) doc["corpus"] = *spec.corpus;
    json domains = json::array();
    for (const auto& d : spec.domains) {
        json dj;
        dj["name"] = d.name;
        dj["indexed"] = d.indexed;
        if (d.dim) dj["dim"] = *d.dim;
        domains.push_back(std::move(dj));
    }
    for (const auto& rel : spec.relations) {
        domains.push_back({{"parent_of", {{"parent", rel.parent}, {"child", rel.child}}}});
    }
    doc["domains"] = std::move(domains);
    json stages = json::array();
    for (const auto& s : spec.stages) {
        json sj;
        sj["kind"] = s.kind;
        sj["name"] = s.name;
        json params = json::object();
        for (const auto& [key, pv] : s.params) {
            if (pv.is_tunable()) {
                params[key] = {{"$tune", tunable_to_json(spec.tunables.at(pv.tunable_index))}};
            } else {
                params[key] = pv.literal;
            }
        }
        sj["params"] = std::move(params);
        sj["inputs"] = s.inputs;
        sj["outputs"] = s.outputs;
        stages.push_back(std::move(sj));
    }
    doc["stages"] = std::move(stages);
    json tuner;
    tuner["objective"] = {{"recall_weight", spec.tuner.recall_weight},
                          {"f1_weight", spec.tuner.f1_weight},
                          {"k", spec.tuner.k}};
    tuner["n_init"] = spec.tuner.n_init;
    tuner["patience"] = spec.tuner.patience;
    tuner["xi"] = spec.tuner.xi;
    tuner["candidates"] = spec.tuner.candidates;
    tuner["perturbations"] = spec.tuner.perturbations;
    tuner["perturb_std"] = spec.tuner.perturb_std;
    doc["tuner"] = std::move(tuner);
    return doc.dump(2) + "\n";
}

bool structurally_equal(const PipelineSpec& a, const PipelineSpec& b) {
    return canonical_form(a) == canonical_form(b);
}

}  // namespace ragtuner::dsl
