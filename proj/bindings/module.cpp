#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "ragtuner/components/builtins.hpp"
#include "ragtuner/components/chunker.hpp"
#include "ragtuner/components/graph.hpp"
#include "ragtuner/components/providers.hpp"
#include "ragtuner/dem/store.hpp"
#include "ragtuner/dsl/spec.hpp"
#include "ragtuner/errors.hpp"
#include "ragtuner/eval/metrics.hpp"
#include "ragtuner/runtime/executor.hpp"
#include "ragtuner/tuner/gp.hpp"
#include "ragtuner/tuner/tuner.hpp"

namespace py = pybind11;
using namespace ragtuner;

namespace {

dem::PropMap props_from_dict(const py::dict& d) {
    dem::PropMap props;
    for (auto item : d) {
        auto key = item.first.cast<std::string>();
        if (py::isinstance<py::bool_>(item.second)) {
            props.emplace(key, item.second.cast<bool>());
        } else if (py::isinstance<py::int_>(item.second)) {
            props.emplace(key, item.second.cast<std::int64_t>());
        } else if (py::isinstance<py::float_>(item.second)) {
            props.emplace(key, item.second.cast<double>());
        } else {
            props.emplace(key, item.second.cast<std::string>());
        }
    }
    return props;
}

py::object prop_to_py(const dem::PropValue& v) {
    return std::visit([](const auto& x) -> py::object { return py::cast(x); }, v);
}

dsl::Assignment assignment_from_dict(const py::dict& d) {
    dsl::Assignment a;
    for (auto item : d) {
        auto key = item.first.cast<std::string>();
        if (py::isinstance<py::bool_>(item.second)) {
            a[key] = item.second.cast<bool>();
        } else if (py::isinstance<py::int_>(item.second)) {
            a[key] = item.second.cast<std::int64_t>();
        } else if (py::isinstance<py::float_>(item.second)) {
            a[key] = item.second.cast<double>();
        } else {
            a[key] = item.second.cast<std::string>();
        }
    }
    return a;
}

py::dict assignment_to_dict(const dsl::Assignment& a) {
    py::dict out;
    for (const auto& [path, value] : a) {
        if (value.is_boolean()) {
            out[py::str(path)] = value.get<bool>();
        } else if (value.is_number_integer()) {
            out[py::str(path)] = value.get<std::int64_t>();
        } else if (value.is_number_float()) {
            out[py::str(path)] = value.get<double>();
        } else {
            out[py::str(path)] = value.get<std::string>();
        }
    }
    return out;
}

py::dict report_to_dict(const eval::MetricReport& report) {
    py::dict out;
    out["k"] = report.k;
    out["mean_recall_at_k"] = report.mean_recall;
    out["mean_f1"] = report.mean_f1;
    out["objective"] = report.objective;
    py::list per_query;
    for (const auto& qm : report.per_query) {
        py::dict q;
        q["qid"] = qm.qid;
        q["recall_at_k"] = qm.recall ? py::cast(*qm.recall) : py::none();
        q["f1"] = qm.f1;
        per_query.append(std::move(q));
    }
    out["per_query"] = std::move(per_query);
    return out;
}

}  // namespace

PYBIND11_MODULE(_ragtuner, m) {
    m.doc() = "Declarative RAG pipelines with Bayesian hyper-parameter tuning";

    py::register_exception<Error>(m, "RagtunerError");

    py::class_<dem::ElementId>(m, "ElementId")
        .def(py::init<std::uint64_t>())
        .def_readonly("value", &dem::ElementId::value)
        .def("__int__", [](const dem::ElementId& id) { return id.value; })
        .def("__repr__", [](const dem::ElementId& id) { return id.to_string(); })
        .def("__eq__", [](const dem::ElementId& a, const dem::ElementId& b) { return a == b; })
        .def("__hash__", [](const dem::ElementId& id) { return id.value; });

    py::class_<dem::DemStore>(m, "DemStore")
        .def(py::init<>())
        .def("create_domain", &dem::DemStore::create_domain, py::arg("name"), py::arg("indexed"),
             py::arg("embedding_dim") = std::nullopt)
        .def(
            "create_element",
            [](dem::DemStore& store, const std::string& domain, const py::dict& props,
               double weight) {
                return store.create_element(domain, props_from_dict(props), weight);
            },
            py::arg("domain"), py::arg("props") = py::dict(), py::arg("weight") = 1.0)
        .def("link", &dem::DemStore::link)
        .def("hyperedge_members", &dem::DemStore::hyperedge_members)
        .def("set_embedding", &dem::DemStore::set_embedding)
        .def("nearest",
             [](const dem::DemStore& store, const std::string& domain,
                const std::vector<double>& query, std::size_t k) {
                 py::list out;
                 for (const auto& n : store.nearest(domain, query, k)) {
                     out.append(py::make_tuple(n.id, n.similarity));
                 }
                 return out;
             })
        .def("validate",
             [](const dem::DemStore& store) {
                 py::list out;
                 for (const auto& v : store.validate()) {
                     out.append(py::make_tuple(v.rule, v.message));
                 }
                 return out;
             })
        .def("children",
             [](const dem::DemStore& store, dem::ElementId id) {
                 return store.element(id).children;
             })
        .def("parents",
             [](const dem::DemStore& store, dem::ElementId id) {
                 return store.element(id).parents;
             })
        .def("props",
             [](const dem::DemStore& store, dem::ElementId id) {
                 py::dict out;
                 for (const auto& [k, v] : store.element(id).props) {
                     out[py::str(k)] = prop_to_py(v);
                 }
                 return out;
             })
        .def("weight",
             [](const dem::DemStore& store, dem::ElementId id) { return store.element(id).weight; })
        .def("size", &dem::DemStore::size)
        .def("domain_names", &dem::DemStore::domain_names)
        .def("save_snapshot", &dem::DemStore::save_snapshot)
        .def_static("load_snapshot", &dem::DemStore::load_snapshot);

    m.def(
        "chunk_spans",
        [](const std::string& text, std::size_t chunk_size, double overlap_ratio) {
            py::list out;
            for (const auto& span : components::chunk_spans(text, chunk_size, overlap_ratio)) {
                py::dict d;
                d["start_token"] = span.start_token;
                d["end_token"] = span.end_token;
                d["text"] = components::chunk_text(text, span);
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("text"), py::arg("chunk_size"), py::arg("overlap_ratio") = 0.0);

    m.def("embed_stub", &components::embed_stub, py::arg("texts"), py::arg("dim"));
    m.def("generate_stub", &components::generate_stub, py::arg("question"), py::arg("contexts"));
    m.def("extract_triples", [](const std::string& text) {
        py::list out;
        for (const auto& t : components::extract_triples(text)) {
            out.append(py::make_tuple(t.subject, t.relation, t.object));
        }
        return out;
    });

    m.def(
        "ppr",
        [](std::size_t num_vertices, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
           const std::map<std::size_t, double>& seeds, double damping, double tolerance,
           int max_iterations) {
            components::EntityGraph graph;
            for (std::size_t v = 0; v < num_vertices; ++v) {
                graph.vertex_index.emplace(dem::ElementId{v}, v);
                graph.vertices.push_back(dem::ElementId{v});
            }
            graph.edges = edges;
            std::map<dem::ElementId, double> seed_map;
            for (const auto& [v, mass] : seeds) seed_map[dem::ElementId{v}] = mass;
            components::PprParams params;
            params.damping = damping;
            params.tolerance = tolerance;
            params.max_iterations = max_iterations;
            std::map<std::size_t, double> out;
            for (const auto& [id, score] : components::ppr(graph, seed_map, params)) {
                out[id.value] = score;
            }
            return out;
        },
        py::arg("num_vertices"), py::arg("edges"), py::arg("seeds"), py::arg("damping") = 0.5,
        py::arg("tolerance") = 1e-8, py::arg("max_iterations") = 100);

    m.def("recall_at_k", &eval::recall_at_k, py::arg("retrieved_keys"), py::arg("gold"),
          py::arg("k"));
    m.def("f1_answer", &eval::f1_answer, py::arg("pred"), py::arg("gold"));

    m.def("expected_improvement", &tuner::expected_improvement, py::arg("mu"), py::arg("sigma"),
          py::arg("best"), py::arg("xi") = 0.0);

    py::class_<tuner::GpSurrogate>(m, "GpSurrogate")
        .def_static("fit",
                    [](const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
                        return tuner::GpSurrogate::fit(X, y);
                    })
        .def("predict",
             [](const tuner::GpSurrogate& gp, const std::vector<double>& x) {
                 auto post = gp.predict(x);
                 return py::make_tuple(post.mean, post.sd);
             })
        .def_property_readonly("length_scale", &tuner::GpSurrogate::length_scale)
        .def_property_readonly("signal_sd", &tuner::GpSurrogate::signal_sd);

    py::class_<dsl::PipelineSpec>(m, "PipelineSpec")
        .def_property_readonly("name", [](const dsl::PipelineSpec& s) { return s.name; })
        .def_property_readonly("tunable_paths",
                               [](const dsl::PipelineSpec& s) {
                                   std::vector<std::string> paths;
                                   for (const auto& t : s.tunables) paths.push_back(t.path);
                                   return paths;
                               })
        .def("canonical", [](const dsl::PipelineSpec& s) { return dsl::canonical_form(s); })
        .def("defaults", [](const dsl::PipelineSpec& s) { return assignment_to_dict(defaults(s)); })
        .def("apply",
             [](const dsl::PipelineSpec& s, const py::dict& assignment) {
                 return dsl::apply_assignment(s, assignment_from_dict(assignment));
             });

    m.def("parse_spec", &dsl::parse_spec);
    m.def("parse_spec_file", &dsl::parse_spec_file);
    m.def("validate_spec_file", [](const std::string& path) {
        auto spec = dsl::parse_spec_file(path);
        auto registry = components::builtin_registry();
        py::list out;
        for (const auto& d : dsl::validate_against_registry(spec, registry)) {
            out.append(py::make_tuple(d.code, d.pointer, d.message));
        }
        return out;
    });

    m.def(
        "run_pipeline",
        [](const std::string& spec_path, const std::string& corpus_dir,
           const std::string& data_path, int k) {
            auto spec = dsl::parse_spec_file(spec_path);
            if (!spec.concrete()) spec = dsl::apply_assignment(spec, dsl::defaults(spec));
            auto registry = components::builtin_registry();
            auto corpus = runtime::load_corpus(corpus_dir);
            auto dataset = eval::load_dataset(data_path);
            std::vector<runtime::Query> queries;
            for (const auto& ex : dataset) queries.push_back({ex.qid, ex.question});
            auto pipeline = runtime::build_pipeline(registry, spec);
            dem::DemStore store;
            auto run = runtime::run_pipeline(pipeline, corpus, queries, store);
            auto report =
                eval::score_run(run, dataset, k > 0 ? k : spec.tuner.k,
                                {spec.tuner.recall_weight, spec.tuner.f1_weight});
            return report_to_dict(report);
        },
        py::arg("spec_path"), py::arg("corpus_dir"), py::arg("data_path"), py::arg("k") = 0);

    m.def(
        "tune",
        [](const std::string& spec_path, const std::string& data_path,
           const std::string& corpus_dir, int budget, double epsilon, std::uint64_t seed,
           const std::string& trace_path, const std::string& warm_start) {
            auto spec = dsl::parse_spec_file(spec_path);
            auto registry = components::builtin_registry();
            runtime::Corpus corpus;
            if (!corpus_dir.empty()) corpus = runtime::load_corpus(corpus_dir);
            auto dataset = eval::load_dataset(data_path);
            tuner::TuneConfig config;
            config.budget = budget;
            config.epsilon = epsilon;
            config.seed = seed;
            config.trace_path = trace_path;
            config.warm_start_path = warm_start;
            auto result = tuner::tune_pipeline(spec, registry, corpus, dataset, config);
            py::dict out;
            out["best_trial"] = result.best.trial;
            out["best_objective"] = *result.best.objective;
            out["assignment"] = assignment_to_dict(result.best.assignment);
            out["trials"] = result.trace.size();
            out["converged_early"] = result.converged_early;
            return out;
        },
        py::arg("spec_path"), py::arg("data_path"), py::arg("corpus_dir") = "",
        py::arg("budget") = 25, py::arg("epsilon") = 0.0, py::arg("seed") = 0,
        py::arg("trace_path") = "", py::arg("warm_start") = "");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "0.1.0";
#endif
}
