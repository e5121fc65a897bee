#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ragtuner/components/builtins.hpp"
#include "ragtuner/dsl/spec.hpp"
#include "ragtuner/errors.hpp"
#include "ragtuner/eval/metrics.hpp"
#include "ragtuner/runtime/executor.hpp"
#include "ragtuner/tuner/tuner.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ragtuner;

constexpr int kExitOk = 0;
constexpr int kExitDomainError = 1;
constexpr int kExitUsageError = 2;

void write_file_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

bool readable_file(const std::string& path) {
    std::ifstream in(path);
    return static_cast<bool>(in);
}

dsl::PipelineSpec load_spec_or_exit(const std::string& path) {
    if (!readable_file(path)) {
        std::cerr << "error: cannot read spec file " << path << "\n";
        std::exit(kExitUsageError);
    }
    return dsl::parse_spec_file(path);
}

runtime::Corpus resolve_corpus(const dsl::PipelineSpec& spec, const std::string& corpus_flag) {
    std::string dir = corpus_flag;
    if (dir.empty() && spec.corpus) {
        fs::path p(*spec.corpus);
        dir = p.is_absolute() ? p.string() : (fs::path(spec.base_dir) / p).string();
    }
    if (dir.empty()) return {};
    return runtime::load_corpus(dir);
}

std::vector<runtime::Query> queries_of(const eval::Dataset& dataset) {
    std::vector<runtime::Query> queries;
    queries.reserve(dataset.size());
    for (const auto& example : dataset) queries.push_back({example.qid, example.question});
    return queries;
}

int cmd_validate(const std::string& spec_path) {
    dsl::PipelineSpec spec;
    try {
        spec = load_spec_or_exit(spec_path);
    } catch (const Error& ex) {
        std::cout << ex.what() << "\n";
        return kExitDomainError;
    }
    auto registry = components::builtin_registry();
    auto diagnostics = dsl::validate_against_registry(spec, registry);
    for (const auto& d : diagnostics) {
        std::cout << d.code << " at " << d.pointer << ": " << d.message << "\n";
    }
    return diagnostics.empty() ? kExitOk : kExitDomainError;
}

int cmd_run(const std::string& spec_path, const std::string& corpus_dir,
            const std::string& data_path, const std::string& out_dir, int k_flag) {
    dsl::PipelineSpec spec = load_spec_or_exit(spec_path);
    if (!corpus_dir.empty() && !fs::is_directory(corpus_dir)) {
        std::cerr << "error: corpus directory not readable: " << corpus_dir << "\n";
        return kExitUsageError;
    }
    if (!readable_file(data_path)) {
        std::cerr << "error: cannot read dataset " << data_path << "\n";
        return kExitUsageError;
    }
    if (!spec.concrete()) {
        std::cerr << "notice: spec declares " << spec.tunables.size()
                  << " tunable(s); substituting declared defaults\n";
        spec = dsl::apply_assignment(spec, dsl::defaults(spec));
    }
    auto registry = components::builtin_registry();
    auto corpus = resolve_corpus(spec, corpus_dir);
    auto dataset = eval::load_dataset(data_path);

    auto pipeline = runtime::build_pipeline(registry, spec);
    dem::DemStore store;
    auto run = runtime::run_pipeline(pipeline, corpus, queries_of(dataset), store);
    for (const auto& [stage, count] : run.index_stats) {
        std::cerr << "index: " << stage << " = " << count << "\n";
    }
    for (const auto& warning : run.warnings) std::cerr << "warning: " << warning << "\n";

    std::size_t k = k_flag > 0 ? static_cast<std::size_t>(k_flag)
                               : static_cast<std::size_t>(spec.tuner.k);
    auto report = eval::score_run(run, dataset, k,
                                  {spec.tuner.recall_weight, spec.tuner.f1_weight});

    write_file_atomic((fs::path(out_dir) / "run.jsonl").string(), runtime::run_result_jsonl(run));
    write_file_atomic((fs::path(out_dir) / "report.json").string(), eval::report_to_json(report));
    std::cout << "R@" << k << " " << report.mean_recall << "  F1 " << report.mean_f1
              << "  objective " << report.objective << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& run_path, const std::string& data_path, int k_flag) {
    if (!readable_file(run_path) || !readable_file(data_path)) {
        std::cerr << "error: cannot read inputs\n";
        return kExitUsageError;
    }
    runtime::RunResult run;
    std::ifstream in(run_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& ex) {
            throw Error(ErrorCode::ParseError,
                        run_path + " line " + std::to_string(line_no) + ": " + ex.what());
        }
        runtime::QueryRecord record;
        record.qid = rec.at("qid").get<std::string>();
        for (const auto& id : rec.value("retrieved", json::array())) {
            record.retrieved.push_back({id.get<std::uint64_t>()});
        }
        for (const auto& key : rec.value("retrieved_keys", json::array())) {
            record.retrieved_keys.push_back(key.get<std::string>());
        }
        record.answer = rec.value("answer", "");
        run.records.push_back(std::move(record));
    }
    auto dataset = eval::load_dataset(data_path);
    auto report = eval::score_run(run, dataset, static_cast<std::size_t>(k_flag > 0 ? k_flag : 5));
    std::cout << eval::report_to_json(report);
    return kExitOk;
}

int cmd_tune(const std::string& spec_path, const std::string& data_path,
             const std::string& corpus_dir, int budget, double epsilon, std::uint64_t seed,
             const std::string& trace_path, const std::string& warm_start,
             std::string best_spec_path) {
    dsl::PipelineSpec spec = load_spec_or_exit(spec_path);
    if (!readable_file(data_path)) {
        std::cerr << "error: cannot read dataset " << data_path << "\n";
        return kExitUsageError;
    }
    if (spec.tunables.empty()) {
        std::cerr << "error: spec declares no tunables; nothing to tune\n";
        return kExitDomainError;
    }
    auto registry = components::builtin_registry();
    auto corpus = resolve_corpus(spec, corpus_dir);
    auto dataset = eval::load_dataset(data_path);

    tuner::TuneConfig config;
    config.budget = budget;
    config.epsilon = epsilon;
    config.seed = seed;
    config.trace_path = trace_path;
    config.warm_start_path = warm_start;
    config.on_trial = [](const tuner::TrialRecord& record, double running_best) {
        std::cerr << "trial " << record.trial << " phase=" << record.phase;
        if (record.failed) {
            std::cerr << " failed";
        } else {
            std::cerr << " objective=" << *record.objective;
        }
        std::cerr << " best=" << running_best << "\n";
    };

    tuner::TuneResult result;
    try {
        result = tuner::tune_pipeline(spec, registry, corpus, dataset, config);
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitDomainError;
    }

    if (best_spec_path.empty()) best_spec_path = trace_path + ".best.json";
    auto best_spec = dsl::apply_assignment(spec, result.best.assignment);
    write_file_atomic(best_spec_path, dsl::canonical_form(best_spec));

    json best_assignment = json::object();
    for (const auto& [path, value] : result.best.assignment) best_assignment[path] = value;
    std::cout << json({{"best_trial", result.best.trial},
                       {"best_objective", *result.best.objective},
                       {"assignment", best_assignment},
                       {"trials", result.trace.size()},
                       {"converged_early", result.converged_early}})
                     .dump(2)
              << "\n";
    return kExitOk;
}

int cmd_replay(const std::string& trace_path, const std::string& spec_path,
               const std::string& data_path, const std::string& corpus_dir, int trial_flag) {
    if (!readable_file(trace_path)) {
        std::cerr << "error: cannot read trace " << trace_path << "\n";
        return kExitUsageError;
    }
    dsl::PipelineSpec spec = load_spec_or_exit(spec_path);
    auto records = tuner::load_trace(trace_path);
    if (records.empty()) {
        std::cerr << "error: trace is empty\n";
        return kExitDomainError;
    }
    std::set<std::string> spec_paths;
    for (const auto& decl : spec.tunables) spec_paths.insert(decl.path);
    for (const auto& record : records) {
        std::set<std::string> record_paths;
        for (const auto& [path, _] : record.assignment) record_paths.insert(path);
        if (record_paths != spec_paths) {
            throw Error(ErrorCode::IncompatibleTrace,
                        "trace assignment paths do not match the spec's tunables");
        }
    }

    const tuner::TrialRecord* chosen = nullptr;
    if (trial_flag >= 0) {
        for (const auto& record : records) {
            if (record.trial == trial_flag) chosen = &record;
        }
        if (chosen == nullptr) {
            std::cerr << "error: no trial " << trial_flag << " in trace\n";
            return kExitDomainError;
        }
    } else {
        for (const auto& record : records) {
            if (record.failed || !record.objective) continue;
            if (chosen == nullptr || *record.objective > *chosen->objective) chosen = &record;
        }
        if (chosen == nullptr) {
            std::cerr << "error: trace holds no successful trial\n";
            return kExitDomainError;
        }
    }

    auto registry = components::builtin_registry();
    auto corpus = resolve_corpus(spec, corpus_dir);
    auto dataset = eval::load_dataset(data_path);
    auto concrete = dsl::apply_assignment(spec, chosen->assignment);
    auto pipeline = runtime::build_pipeline(registry, concrete);
    dem::DemStore store;
    auto run = runtime::run_pipeline(pipeline, corpus, queries_of(dataset), store);
    auto report = eval::score_run(run, dataset, static_cast<std::size_t>(spec.tuner.k),
                                  {spec.tuner.recall_weight, spec.tuner.f1_weight});

    json out;
    out["trial"] = chosen->trial;
    out["replayed_objective"] = report.objective;
    if (chosen->objective) {
        out["recorded_objective"] = *chosen->objective;
        out["objective_delta"] = report.objective - *chosen->objective;
    }
    out["mean_recall_at_k"] = report.mean_recall;
    out["mean_f1"] = report.mean_f1;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_report(const std::string& trace_path) {
    if (!readable_file(trace_path)) {
        std::cerr << "error: cannot read trace " << trace_path << "\n";
        return kExitUsageError;
    }
    auto records = tuner::load_trace(trace_path);
    std::cout << "trial\tphase\tobjective\tbest\n";
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& record : records) {
        std::cout << record.trial << "\t" << record.phase << "\t";
        if (record.failed || !record.objective) {
            std::cout << "-";
        } else {
            best = std::max(best, *record.objective);
            std::cout << *record.objective;
        }
        std::cout << "\t";
        if (std::isfinite(best)) {
            std::cout << best;
        } else {
            std::cout << "-";
        }
        std::cout << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Declarative RAG pipelines with Bayesian hyper-parameter tuning"};
    app.require_subcommand(1);

    std::string spec_path, corpus_dir, data_path, out_dir, trace_path, warm_start, run_path,
        best_spec_path;
    int k_flag = 0;
    int budget = 25;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    int trial_flag = -1;

    auto* validate = app.add_subcommand("validate", "Check a pipeline spec");
    validate->add_option("-c,--config", spec_path, "Pipeline spec (.json)")->required();

    auto* run = app.add_subcommand("run", "Index, retrieve, generate and score once");
    run->add_option("-c,--config", spec_path)->required();
    run->add_option("--corpus", corpus_dir, "Directory of corpus text files")->required();
    run->add_option("--data", data_path, "Dataset JSONL")->required();
    run->add_option("-o,--out", out_dir, "Output directory")->required();
    run->add_option("-k", k_flag, "Recall cutoff (default: spec tuner block)");

    auto* eval_cmd = app.add_subcommand("eval", "Re-score a run.jsonl against a dataset");
    eval_cmd->add_option("--run", run_path)->required();
    eval_cmd->add_option("--data", data_path)->required();
    eval_cmd->add_option("-k", k_flag);

    auto* tune = app.add_subcommand("tune", "Bayesian-optimize the spec's tunables");
    tune->add_option("-c,--config", spec_path)->required();
    tune->add_option("--data", data_path)->required();
    tune->add_option("--corpus", corpus_dir, "Overrides the spec's corpus path");
    tune->add_option("--budget", budget, "Maximum trials")->required();
    tune->add_option("--epsilon", epsilon, "Convergence threshold (0 disables)");
    tune->add_option("--seed", seed, "Master seed");
    tune->add_option("--trace", trace_path, "Observation trace output (JSONL)")->required();
    tune->add_option("--warm-start", warm_start, "Reuse a previous trace");
    tune->add_option("--best-spec", best_spec_path, "Where to write the best concrete spec");

    auto* replay = app.add_subcommand("replay", "Re-evaluate a traced assignment");
    replay->add_option("--trace", trace_path)->required();
    replay->add_option("-c,--config", spec_path)->required();
    replay->add_option("--data", data_path)->required();
    replay->add_option("--corpus", corpus_dir);
    replay->add_option("--trial", trial_flag, "Trial index (default: best)");

    auto* report = app.add_subcommand("report", "Print the best-so-far curve as TSV");
    report->add_option("--trace", trace_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsageError;
    }

    try {
        if (validate->parsed()) return cmd_validate(spec_path);
        if (run->parsed()) return cmd_run(spec_path, corpus_dir, data_path, out_dir, k_flag);
        if (eval_cmd->parsed()) return cmd_eval(run_path, data_path, k_flag);
        if (tune->parsed()) {
            return cmd_tune(spec_path, data_path, corpus_dir, budget, epsilon, seed, trace_path,
                            warm_start, best_spec_path);
        }
        if (replay->parsed()) {
            return cmd_replay(trace_path, spec_path, data_path, corpus_dir, trial_flag);
        }
        if (report->parsed()) return cmd_report(trace_path);
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitDomainError;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitDomainError;
    }
    return kExitUsageError;
}
