#include "fluhost/eval/disagreement.hpp"

#include "fluhost/error.hpp"

namespace fluhost::eval {

DisagreementReport ensemble_disagreement(const std::vector<std::pair<std::string, std::vector<int>>>& predictions,
                                         const std::vector<int>& y_true) {
    if (predictions.empty()) throw DataError("no model predictions given");
    DisagreementReport rep;
    for (const auto& [name, pred] : predictions) {
        if (pred.size() != y_true.size())
            throw DataError("model '" + name + "' has " + std::to_string(pred.size()) + " predictions for " +
                            std::to_string(y_true.size()) + " records");
        rep.models.push_back(name);
    }
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        std::size_t correct = 0;
        for (const auto& p : predictions) correct += p.second[i] == y_true[i];
        if (correct == predictions.size()) {
            rep.all_correct.push_back(i);
        } else if (correct == 0) {
            rep.all_wrong.push_back(i);
            WrongRecord w{i, y_true[i], {}};
            for (const auto& p : predictions) w.predictions.push_back(p.second[i]);
            rep.wrong_detail.push_back(std::move(w));
        } else {
            rep.mixed.push_back(i);
        }
    }
    return rep;
}

nlohmann::json DisagreementReport::to_json() const {
    const double n = static_cast<double>(all_correct.size() + mixed.size() + all_wrong.size());
    nlohmann::json detail = nlohmann::json::array();
    for (const auto& w : wrong_detail)
        detail.push_back({{"index", w.index}, {"truth", w.truth}, {"predictions", w.predictions}});
    return {{"models", models},
            {"all_correct", all_correct.size()},
            {"mixed", mixed.size()},
            {"all_wrong", all_wrong.size()},
            {"all_wrong_fraction", n > 0 ? static_cast<double>(all_wrong.size()) / n : 0.0},
            {"all_wrong_records", detail}};
}

std::string DisagreementReport::wrong_csv(const std::vector<std::string>& ids,
                                          const std::vector<std::string>& class_names) const {
    auto name = [&](int c) {
        return c >= 0 && static_cast<std::size_t>(c) < class_names.size() ? class_names[static_cast<std::size_t>(c)]
                                                                          : std::to_string(c);
    };
    std::string out = "index,id,truth";
    for (const auto& m : models) out += "," + m;
    out += "\n";
    for (const auto& w : wrong_detail) {
        out += std::to_string(w.index) + "," + (w.index < ids.size() ? ids[w.index] : "") + "," + name(w.truth);
        for (int p : w.predictions) out += "," + name(p);
        out += "\n";
    }
    return out;
}

}  // namespace fluhost::eval
