#pragma once

#include <set>
#include <string>
#include <vector>

namespace ragtuner::eval {

struct QaExample {
    std::string qid;
    std::string question;
    std::string gold_answer;
    std::set<std::string> gold_passage_keys;
};

using Dataset = std::vector<QaExample>;

/// JSONL, one {"qid","question","answer","gold_passages"} object per line.
Dataset load_dataset(const std::string& path);
Dataset parse_dataset_jsonl(const std::string& text);

}  // namespace ragtuner::eval
