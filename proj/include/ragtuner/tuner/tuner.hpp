#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ragtuner/dsl/spec.hpp"
#include "ragtuner/eval/dataset.hpp"
#include "ragtuner/runtime/executor.hpp"
#include "ragtuner/tuner/search_space.hpp"

namespace ragtuner::tuner {

struct TrialRecord {
    int trial = 0;
    std::string phase;  // "random" | "bayesian" | "warm"
    dsl::Assignment assignment;
    std::optional<double> objective;  // absent for failed trials
    bool failed = false;
    nlohmann::json metrics = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::int64_t timestamp = 0;  // logical clock (trial index) so traces replay byte-identically
};

nlohmann::json trial_to_json(const TrialRecord& record);
TrialRecord trial_from_json(const nlohmann::json& j);

std::vector<TrialRecord> load_trace(const std::string& path);

struct WarmStart {
    std::vector<TrialRecord> records;  // phase rewritten to "warm"
    std::size_t skipped = 0;           // incompatible with the current space
};

WarmStart warm_start_load(const std::string& path, const SearchSpace& space);

struct SuggestConfig {
    int n_init = 0;  // 0 = auto: max(5, 2 * encoded dims)
    int candidates = 1024;
    int perturbations = 64;
    double perturb_std = 0.05;
    double xi = 0.01;
};

struct Suggestion {
    dsl::Assignment assignment;
    std::string phase;  // "random" | "bayesian"
};

/// Random exploration below n_init observations, then GP + expected
/// improvement over a quasi-random candidate set plus local perturbations of
/// the incumbent. Deterministic given the rng state and history.
Suggestion suggest(const std::vector<TrialRecord>& history, const SearchSpace& space,
                   std::mt19937_64& rng, const SuggestConfig& config = {});

struct TrialOutcome {
    std::optional<double> objective;
    nlohmann::json metrics = nlohmann::json::object();
    bool failed = false;
};

using TrialEvaluator = std::function<TrialOutcome(const dsl::Assignment&)>;

struct TuneConfig {
    int budget = 25;
    double epsilon = 0.0;  // 0 disables epsilon-convergence
    int patience = 5;
    std::uint64_t seed = 0;
    SuggestConfig suggest;
    std::string trace_path;       // written incrementally when non-empty
    std::string warm_start_path;  // loaded when non-empty
    /// Called after each new trial with the record and the running best.
    std::function<void(const TrialRecord&, double)> on_trial;
};

struct TuneResult {
    TrialRecord best;
    std::vector<TrialRecord> trace;  // warm + new, in trial order
    int new_trials = 0;
    bool converged_early = false;
};

/// The tuning loop: suggest -> evaluate -> record, until the budget is
/// reached or the best objective improved by less than epsilon over the last
/// `patience` trials (checked once trials > n_init + patience). Failed
/// trials are recorded and excluded from the surrogate; throws when every
/// trial failed.
TuneResult tune(const SearchSpace& space, const TrialEvaluator& evaluate,
                const TuneConfig& config);

/// Evaluator that applies an assignment to the spec, builds and runs the
/// pipeline over the corpus/dataset, and scores it per the spec's tuner
/// block. Stage failures become failed trial outcomes.
TrialEvaluator pipeline_evaluator(const dsl::PipelineSpec& spec,
                                  const runtime::ComponentRegistry& registry,
                                  const runtime::Corpus& corpus, const eval::Dataset& dataset);

TuneResult tune_pipeline(const dsl::PipelineSpec& spec,
                         const runtime::ComponentRegistry& registry,
                         const runtime::Corpus& corpus, const eval::Dataset& dataset,
                         TuneConfig config);

}  // namespace ragtuner::tuner
