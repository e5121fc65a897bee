#include "ragtuner/eval/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ragtuner/errors.hpp"

namespace ragtuner::eval {

using nlohmann::json;

Dataset parse_dataset_jsonl(const std::string& text) {
    Dataset dataset;
    std::set<std::string> seen;
    std::istringstream in(text);
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
                        "line " + std::to_string(line_no) + ": " + ex.what());
        }
        for (const char* field : {"qid", "question", "answer", "gold_passages"}) {
            if (!rec.contains(field)) {
                throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                                       ": missing field '" + field + "'");
            }
        }
        QaExample example;
        example.qid = rec["qid"].get<std::string>();
        example.question = rec["question"].get<std::string>();
        example.gold_answer = rec["answer"].get<std::string>();
        for (const auto& key : rec["gold_passages"]) {
            example.gold_passage_keys.insert(key.get<std::string>());
        }
        if (!seen.insert(example.qid).second) {
            throw Error(ErrorCode::DuplicateQid,
                        "'" + example.qid + "' at line " + std::to_string(line_no));
        }
        dataset.push_back(std::move(example));
    }
    return dataset;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset_jsonl(buf.str());
}

}  // namespace ragtuner::eval
