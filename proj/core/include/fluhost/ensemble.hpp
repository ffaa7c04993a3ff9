#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "fluhost/matrix.hpp"

namespace fluhost::ensemble {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;   // rows with x[feature] <= threshold
    int right = -1;
    std::vector<double> counts;  // leaf only: weighted class counts

    bool is_leaf() const noexcept { return feature < 0; }
};

class DecisionTree {
public:
    DecisionTree() = default;
    DecisionTree(std::vector<TreeNode> nodes, std::size_t num_classes);

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t depth() const;

    // Normalized class distribution of the leaf that `x` falls into.
    std::vector<double> leaf_distribution(std::span<const double> x) const;
    int predict(std::span<const double> x) const;
    Matrix predict_proba(const Matrix& X) const;

    nlohmann::json to_json() const;
    static DecisionTree from_json(const nlohmann::json& j);

private:
    std::vector<TreeNode> nodes_;
    std::size_t num_classes_ = 0;
};

struct TreeParams {
    std::size_t max_depth = 10;
    // Candidate features per split, sampled without replacement; 0 means all.
    std::size_t features_per_split = 0;
};

// Greedy Gini splits. Thresholds are midpoints between consecutive distinct
// values; gain ties go to the lowest feature index, then lowest threshold.
// Empty `weights` means unit weights.
DecisionTree fit_tree(const Matrix& X, std::span<const int> y, std::size_t num_classes, const TreeParams& params,
                      std::mt19937_64& rng, std::span<const double> weights = {});

// Same, restricted to `rows` (duplicates allowed, as in a bootstrap sample).
DecisionTree fit_tree_on_rows(const Matrix& X, std::span<const int> y, std::size_t num_classes,
                              std::span<const std::size_t> rows, const TreeParams& params, std::mt19937_64& rng,
                              std::span<const double> weights = {});

double gini(std::span<const double> class_weights);

struct ForestConfig {
    std::size_t n_estimators = 100;
    std::size_t max_depth = 10;
    std::size_t features_per_split = 0;  // 0 means ceil(sqrt(d))
    std::uint64_t seed = 0;
    bool bootstrap = true;
    std::size_t workers = 1;
};

class RandomForest {
public:
    RandomForest() = default;
    RandomForest(std::vector<DecisionTree> trees, std::size_t num_classes);

    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    std::size_t num_classes() const noexcept { return num_classes_; }

    // Mean of the per-tree leaf distributions.
    Matrix predict_proba(const Matrix& X) const;

    nlohmann::json to_json() const;
    static RandomForest from_json(const nlohmann::json& j);

private:
    std::vector<DecisionTree> trees_;
    std::size_t num_classes_ = 0;
};

// Tree i uses its own generator seeded from (seed, i), so trees can be fitted
// in any order.
RandomForest fit_forest(const Matrix& X, std::span<const int> y, std::size_t num_classes, const ForestConfig& cfg);

struct RusBoostConfig {
    std::size_t n_estimators = 50;
    double learning_rate = 0.1;
    std::size_t max_depth = 2;
    std::uint64_t seed = 0;
};

class RusBoost {
public:
    RusBoost() = default;
    RusBoost(std::vector<DecisionTree> stages, std::vector<double> alphas, std::size_t num_classes);

    const std::vector<DecisionTree>& stages() const noexcept { return stages_; }
    const std::vector<double>& alphas() const noexcept { return alphas_; }
    std::size_t num_classes() const noexcept { return num_classes_; }

    // Stage votes weighted by alpha, normalized per row.
    Matrix predict_proba(const Matrix& X) const;

    nlohmann::json to_json() const;
    static RusBoost from_json(const nlohmann::json& j);

private:
    std::vector<DecisionTree> stages_;
    std::vector<double> alphas_;
    std::size_t num_classes_ = 0;
};

// Row indices holding exactly the minority-class count from every class,
// grouped by class in ascending class order.
std::vector<std::size_t> balanced_undersample(std::span<const int> y, std::size_t num_classes, std::mt19937_64& rng);

// Boosting with per-round random undersampling and multiclass (SAMME) stage
// weights. Rounds whose weighted error reaches 1 - 1/C are redrawn up to 10
// times; boosting stops early after a perfect round.
RusBoost fit_rusboost(const Matrix& X, std::span<const int> y, std::size_t num_classes, const RusBoostConfig& cfg);

}  // namespace fluhost::ensemble
