#include "ragtuner/tuner/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ragtuner/errors.hpp"
#include "ragtuner/eval/metrics.hpp"
#include "ragtuner/text.hpp"
#include "ragtuner/tuner/gp.hpp"

namespace ragtuner::tuner {

using nlohmann::json;

json trial_to_json(const TrialRecord& record) {
    json j;
    j["trial"] = record.trial;
    j["phase"] = record.phase;
    json assignment = json::object();
    for (const auto& [path, value] : record.assignment) assignment[path] = value;
    j["assignment"] = std::move(assignment);
    if (record.failed) {
        j["failed"] = true;
    } else {
        j["objective"] = record.objective.value();
        j["metrics"] = record.metrics;
    }
    j["seed"] = record.seed;
    j["timestamp"] = record.timestamp;
    return j;
}

TrialRecord trial_from_json(const json& j) {
    TrialRecord record;
    record.trial = j.at("trial").get<int>();
    record.phase = j.at("phase").get<std::string>();
    for (const auto& [path, value] : j.at("assignment").items()) {
        record.assignment[path] = value;
    }
    record.failed = j.value("failed", false);
    if (!record.failed && j.contains("objective")) {
        record.objective = j["objective"].get<double>();
    }
    if (j.contains("metrics")) record.metrics = j["metrics"];
    record.seed = j.value("seed", std::uint64_t{0});
    record.timestamp = j.value("timestamp", std::int64_t{0});
    return record;
}

std::vector<TrialRecord> load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::vector<TrialRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(trial_from_json(json::parse(line)));
        } catch (const json::exception& ex) {
            throw Error(ErrorCode::ParseError,
                        path + " line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return records;
}

WarmStart warm_start_load(const std::string& path, const SearchSpace& space) {
    WarmStart out;
    for (auto& record : load_trace(path)) {
        if (!space.accepts(record.assignment)) {
            ++out.skipped;
            continue;
        }
        record.phase = "warm";
        out.records.push_back(std::move(record));
    }
    return out;
}

namespace {

constexpr int kHaltonPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

int effective_n_init(const SuggestConfig& config, std::size_t encoded_dim) {
    if (config.n_init > 0) return config.n_init;
    return std::max<int>(5, static_cast<int>(2 * encoded_dim));
}

double best_objective(const std::vector<TrialRecord>& records, std::size_t limit) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < records.size() && i < limit; ++i) {
        if (!records[i].failed && records[i].objective && *records[i].objective > best) {
            best = *records[i].objective;
        }
    }
    return best;
}

}  // namespace

Suggestion suggest(const std::vector<TrialRecord>& history, const SearchSpace& space,
                   std::mt19937_64& rng, const SuggestConfig& config) {
    const std::size_t dim = space.encoded_dim();
    const int n_init = effective_n_init(config, dim);

    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (const auto& record : history) {
        if (record.failed || !record.objective) continue;
        xs.push_back(space.encode(record.assignment));
        ys.push_back(*record.objective);
    }

    if (history.size() < static_cast<std::size_t>(n_init) || xs.empty()) {
        return {space.sample(rng), "random"};
    }

    GpSurrogate gp = GpSurrogate::fit(xs, ys);
    const double best = *std::max_element(ys.begin(), ys.end());
    const std::size_t best_index =
        static_cast<std::size_t>(std::max_element(ys.begin(), ys.end()) - ys.begin());

    std::vector<std::vector<double>> candidates;
    candidates.reserve(static_cast<std::size_t>(config.candidates + config.perturbations));
    // Quasi-random coverage, offset per call so successive suggestions see
    // fresh points.
    const std::uint64_t offset =
        1 + static_cast<std::uint64_t>(history.size()) * static_cast<std::uint64_t>(config.candidates);
    for (int c = 0; c < config.candidates; ++c) {
        std::vector<double> x(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            x[d] = halton(offset + static_cast<std::uint64_t>(c),
                          kHaltonPrimes[d % std::size(kHaltonPrimes)]);
        }
        candidates.push_back(std::move(x));
    }
    std::normal_distribution<double> noise(0.0, config.perturb_std);
    for (int p = 0; p < config.perturbations; ++p) {
        std::vector<double> x = xs[best_index];
        for (double& v : x) v = std::clamp(v + noise(rng), 0.0, 1.0);
        candidates.push_back(std::move(x));
    }

    std::size_t arg_best = 0;
    double ei_best = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        Posterior post = gp.predict(candidates[i]);
        double ei = expected_improvement(post.mean, post.sd, best, config.xi);
        if (ei > ei_best) {
            ei_best = ei;
            arg_best = i;
        }
    }
    return {space.decode(candidates[arg_best]), "bayesian"};
}

TuneResult tune(const SearchSpace& space, const TrialEvaluator& evaluate,
                const TuneConfig& config) {
    if (config.budget < 1) {
        throw Error(ErrorCode::DegenerateInputs, "budget must be >= 1");
    }
    TuneResult result;
    if (!config.warm_start_path.empty()) {
        WarmStart warm = warm_start_load(config.warm_start_path, space);
        result.trace = std::move(warm.records);
        for (std::size_t i = 0; i < result.trace.size(); ++i) {
            result.trace[i].trial = static_cast<int>(i);
            result.trace[i].timestamp = static_cast<std::int64_t>(i);
        }
    }

    std::ofstream trace_out;
    if (!config.trace_path.empty()) {
        trace_out.open(config.trace_path, std::ios::trunc);
        if (!trace_out) {
            throw Error(ErrorCode::IoError, "cannot write " + config.trace_path);
        }
        for (const auto& record : result.trace) {
            trace_out << trial_to_json(record).dump() << '\n';
        }
        trace_out.flush();
    }

    const int n_init = effective_n_init(config.suggest, space.encoded_dim());
    while (result.trace.size() < static_cast<std::size_t>(config.budget)) {
        const int trial = static_cast<int>(result.trace.size());
        const std::uint64_t trial_seed =
            text::splitmix64(config.seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1));
        std::mt19937_64 rng(trial_seed);
        Suggestion suggestion = suggest(result.trace, space, rng, config.suggest);

        TrialRecord record;
        record.trial = trial;
        record.phase = suggestion.phase;
        record.assignment = suggestion.assignment;
        record.seed = trial_seed;
        record.timestamp = trial;
        TrialOutcome outcome = evaluate(suggestion.assignment);
        record.failed = outcome.failed || !outcome.objective.has_value();
        if (!record.failed) {
            record.objective = outcome.objective;
            record.metrics = outcome.metrics;
        }
        result.trace.push_back(record);
        ++result.new_trials;
        if (trace_out.is_open()) {
            trace_out << trial_to_json(record).dump() << '\n';
            trace_out.flush();
        }
        if (config.on_trial) {
            config.on_trial(record, best_objective(result.trace, result.trace.size()));
        }

        const std::size_t trials = result.trace.size();
        if (trials >= static_cast<std::size_t>(config.budget)) break;
        if (config.epsilon > 0.0 &&
            trials > static_cast<std::size_t>(n_init + config.patience)) {
            double now = best_objective(result.trace, trials);
            double before = best_objective(result.trace, trials - config.patience);
            if (std::isfinite(now) && std::isfinite(before) && now - before < config.epsilon) {
                result.converged_early = true;
                break;
            }
        }
    }

    const TrialRecord* best = nullptr;
    for (const auto& record : result.trace) {
        if (record.failed || !record.objective) continue;
        if (best == nullptr || *record.objective > *best->objective) best = &record;
    }
    if (best == nullptr) {
        throw Error(ErrorCode::StageFailure, "every trial failed; nothing to return");
    }
    result.best = *best;
    return result;
}

TrialEvaluator pipeline_evaluator(const dsl::PipelineSpec& spec,
                                  const runtime::ComponentRegistry& registry,
                                  const runtime::Corpus& corpus, const eval::Dataset& dataset) {
    std::vector<runtime::Query> queries;
    queries.reserve(dataset.size());
    for (const auto& example : dataset) queries.push_back({example.qid, example.question});

    return [&spec, &registry, corpus, dataset, queries](const dsl::Assignment& assignment) {
        TrialOutcome outcome;
        try {
            dsl::PipelineSpec concrete = dsl::apply_assignment(spec, assignment);
            runtime::Pipeline pipeline = runtime::build_pipeline(registry, concrete);
            dem::DemStore store;
            runtime::RunResult run = runtime::run_pipeline(pipeline, corpus, queries, store);
            eval::MetricReport report =
                eval::score_run(run, dataset, static_cast<std::size_t>(spec.tuner.k),
                                {spec.tuner.recall_weight, spec.tuner.f1_weight});
            outcome.objective = report.objective;
            outcome.metrics = {{"mean_recall_at_k", report.mean_recall},
                               {"mean_f1", report.mean_f1},
                               {"k", report.k}};
        } catch (const Error&) {
            outcome.failed = true;
        }
        return outcome;
    };
}

TuneResult tune_pipeline(const dsl::PipelineSpec& spec,
                         const runtime::ComponentRegistry& registry,
                         const runtime::Corpus& corpus, const eval::Dataset& dataset,
                         TuneConfig config) {
    if (spec.tunables.empty()) {
        throw Error(ErrorCode::DegenerateInputs, "spec declares no tunables");
    }
    if (config.suggest.n_init == 0) config.suggest.n_init = spec.tuner.n_init;
    config.suggest.xi = spec.tuner.xi;
    config.suggest.candidates = spec.tuner.candidates;
    config.suggest.perturbations = spec.tuner.perturbations;
    config.suggest.perturb_std = spec.tuner.perturb_std;
    config.patience = spec.tuner.patience;
    SearchSpace space = search_space_of(spec);
    return tune(space, pipeline_evaluator(spec, registry, corpus, dataset), config);
}

}  // namespace ragtuner::tuner
