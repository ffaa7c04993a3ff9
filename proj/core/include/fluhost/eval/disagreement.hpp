#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace fluhost::eval {

struct WrongRecord {
    std::size_t index;
    int truth;
    std::vector<int> predictions;  // one per model, in model order
};

struct DisagreementReport {
    std::vector<std::string> models;
    std::vector<std::size_t> all_correct;
    std::vector<std::size_t> mixed;
    std::vector<std::size_t> all_wrong;
    std::vector<WrongRecord> wrong_detail;

    nlohmann::json to_json() const;

    // `index,id,truth,<model>...` for the records every model got wrong.
    std::string wrong_csv(const std::vector<std::string>& ids, const std::vector<std::string>& class_names) const;
};

// Splits records by how many of the models predicted them correctly.
DisagreementReport ensemble_disagreement(const std::vector<std::pair<std::string, std::vector<int>>>& predictions,
                                         const std::vector<int>& y_true);

}  // namespace fluhost::eval
