#include "ragtuner/eval/metrics.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "ragtuner/errors.hpp"
#include "ragtuner/text.hpp"

namespace ragtuner::eval {

using nlohmann::json;

double recall_at_k(const std::vector<std::string>& retrieved_keys,
                   const std::set<std::string>& gold, std::size_t k) {
    if (gold.empty()) {
        throw Error(ErrorCode::EmptyGold, "recall is undefined for an empty gold set");
    }
    std::set<std::string> top;
    for (std::size_t i = 0; i < retrieved_keys.size() && i < k; ++i) {
        top.insert(retrieved_keys[i]);
    }
    std::size_t hits = 0;
    for (const auto& key : gold) hits += top.count(key);
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double f1_answer(const std::string& pred, const std::string& gold) {
    auto pred_tokens = text::answer_tokens(pred);
    auto gold_tokens = text::answer_tokens(gold);
    if (pred_tokens.empty() && gold_tokens.empty()) return 1.0;
    if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;

    std::map<std::string, std::size_t> gold_counts;
    for (const auto& tok : gold_tokens) ++gold_counts[tok];
    std::size_t overlap = 0;
    for (const auto& tok : pred_tokens) {
        auto it = gold_counts.find(tok);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    double p = static_cast<double>(overlap) / static_cast<double>(pred_tokens.size());
    double r = static_cast<double>(overlap) / static_cast<double>(gold_tokens.size());
    return 2.0 * p * r / (p + r);
}

MetricReport score_run(const runtime::RunResult& run, const Dataset& dataset, std::size_t k,
                       ObjectiveWeights weights) {
    std::map<std::string, const runtime::QueryRecord*> by_qid;
    for (const auto& record : run.records) by_qid[record.qid] = &record;

    MetricReport report;
    report.k = k;
    report.weights = weights;
    double recall_sum = 0.0;
    std::size_t recall_count = 0;
    double f1_sum = 0.0;
    for (const auto& example : dataset) {
        auto it = by_qid.find(example.qid);
        if (it == by_qid.end()) {
            throw Error(ErrorCode::MissingQuery, "run has no record for qid '" + example.qid + "'");
        }
        QueryMetrics qm;
        qm.qid = example.qid;
        if (!example.gold_passage_keys.empty()) {
            qm.recall = recall_at_k(it->second->retrieved_keys, example.gold_passage_keys, k);
            recall_sum += *qm.recall;
            ++recall_count;
        }
        qm.f1 = f1_answer(it->second->answer, example.gold_answer);
        f1_sum += qm.f1;
        report.per_query.push_back(std::move(qm));
    }
    report.mean_recall = recall_count > 0 ? recall_sum / static_cast<double>(recall_count) : 0.0;
    report.mean_f1 =
        dataset.empty() ? 0.0 : f1_sum / static_cast<double>(dataset.size());
    if (run.objective_override.has_value()) {
        report.objective = *run.objective_override;
    } else {
        report.objective =
            weights.recall_weight * report.mean_recall + weights.f1_weight * report.mean_f1;
    }
    return report;
}

std::string report_to_json(const MetricReport& report) {
    json doc;
    doc["k"] = report.k;
    doc["weights"] = {{"recall_weight", report.weights.recall_weight},
                      {"f1_weight", report.weights.f1_weight}};
    doc["mean_recall_at_k"] = report.mean_recall;
    doc["mean_f1"] = report.mean_f1;
    doc["objective"] = report.objective;
    json per_query = json::array();
    for (const auto& qm : report.per_query) {
        json q;
        q["qid"] = qm.qid;
        q["recall_at_k"] = qm.recall.has_value() ? json(*qm.recall) : json(nullptr);
        q["f1"] = qm.f1;
        per_query.push_back(std::move(q));
    }
    doc["per_query"] = std::move(per_query);
    return doc.dump(2) + "\n";
}

}  // namespace ragtuner::eval
