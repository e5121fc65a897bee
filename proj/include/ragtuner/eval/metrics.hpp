#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ragtuner/eval/dataset.hpp"
#include "ragtuner/runtime/executor.hpp"

namespace ragtuner::eval {

/// |top-k(retrieved) ∩ gold| / |gold| over passage keys. Duplicate keys in
/// the top-k count once. Throws EmptyGold when gold is empty.
double recall_at_k(const std::vector<std::string>& retrieved_keys,
                   const std::set<std::string>& gold, std::size_t k);

/// Standard QA token-multiset F1 after normalization (lowercase, strip
/// punctuation, drop a/an/the). Both empty -> 1.0; exactly one empty -> 0.0.
double f1_answer(const std::string& pred, const std::string& gold);

struct ObjectiveWeights {
    double recall_weight = 0.5;
    double f1_weight = 0.5;
};

struct QueryMetrics {
    std::string qid;
    std::optional<double> recall;  // absent when the example has no gold passages
    double f1 = 0.0;
};

struct MetricReport {
    std::size_t k = 5;
    ObjectiveWeights weights;
    std::vector<QueryMetrics> per_query;
    double mean_recall = 0.0;
    double mean_f1 = 0.0;
    double objective = 0.0;
};

MetricReport score_run(const runtime::RunResult& run, const Dataset& dataset, std::size_t k,
                       ObjectiveWeights weights = {});

std::string report_to_json(const MetricReport& report);

}  // namespace ragtuner::eval
