#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluhost/eval/metrics.hpp"
#include "fluhost/matrix.hpp"

namespace fluhost::eval {

// Per class, the shuffled members are dealt round-robin into k folds. The
// dealing position carries over from one class to the next so fold sizes
// stay within one of each other. Each fold's indices are sorted.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed);

struct CvPlan {
    std::size_t k_outer = 5;
    std::size_t k_inner = 4;
    std::uint64_t seed = 0;
    std::vector<int> outer;               // outer test fold per record
    std::vector<std::vector<int>> inner;  // [outer fold][record]: inner fold, -1 on the outer test side

    std::size_t size() const noexcept { return outer.size(); }
    std::vector<std::size_t> outer_test(std::size_t f) const;
    std::vector<std::size_t> outer_train(std::size_t f) const;
    std::vector<std::size_t> inner_validation(std::size_t f, std::size_t i) const;
    std::vector<std::size_t> inner_train(std::size_t f, std::size_t i) const;

    // Throws DataError if the plan does not describe `n` records consistently.
    void validate(std::size_t n) const;

    nlohmann::json to_json() const;
    static CvPlan from_json(const nlohmann::json& j);
};

// Inner folds stratify each outer training split with a seed derived from
// (seed, outer fold).
CvPlan make_plan(std::span<const int> labels, std::size_t k_outer, std::size_t k_inner, std::uint64_t seed);

using HyperParams = std::map<std::string, double>;

nlohmann::json to_json(const HyperParams& hp);

// Trains on `train` rows with `hp` and returns class probabilities for the
// `test` rows, in order.
using FitPredict = std::function<Matrix(std::span<const std::size_t> train, std::span<const std::size_t> test,
                                        const HyperParams& hp, std::uint64_t seed)>;

struct OuterFold {
    std::size_t fold = 0;
    std::size_t chosen = 0;            // index into the grid
    std::vector<double> inner_scores;  // mean inner mean_score per grid point; empty when not searched
    std::vector<std::size_t> test;
    Matrix proba;  // rows follow `test`
    MetricsReport report;
};

struct NestedCvResult {
    std::vector<HyperParams> grid;
    std::vector<OuterFold> folds;
    MetricsReport mean;    // average of the outer-fold reports
    MetricsReport pooled;  // all out-of-fold predictions scored together
    Matrix oof_proba;      // records x classes

    nlohmann::json to_json() const;
};

// Inner search picks the grid point with the highest mean inner mean_score,
// ties going to the earlier point; a one-point grid is used without search.
// The winner is refit on the whole outer training split. Outer folds run on
// up to `workers` threads; results do not depend on the worker count.
NestedCvResult nested_cv(std::span<const int> labels, const std::vector<std::string>& class_names,
                         const FitPredict& fit, const std::vector<HyperParams>& grid, const CvPlan& plan,
                         std::size_t workers = 1);

}  // namespace fluhost::eval
