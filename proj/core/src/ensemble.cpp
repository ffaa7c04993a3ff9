#include "fluhost/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fluhost/error.hpp"
#include "fluhost/util.hpp"

namespace fluhost::ensemble {

namespace {

void check_xy(const Matrix& X, std::span<const int> y, std::size_t num_classes) {
    if (X.rows() == 0 || y.empty()) throw DataError("cannot fit a tree model on empty data");
    if (X.rows() != y.size())
        throw DataError(std::to_string(X.rows()) + " feature rows but " + std::to_string(y.size()) + " labels");
    if (X.cols() == 0) throw DataError("feature matrix has no columns");
    if (num_classes < 1) throw ConfigError("num_classes must be positive");
    for (int l : y)
        if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
            throw DataError("label " + std::to_string(l) + " outside [0, " + std::to_string(num_classes) + ")");
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, std::span<const int> y, std::span<const double> w, std::size_t C,
                const TreeParams& p, std::mt19937_64& rng)
        : X_(X), y_(y), w_(w), C_(C), p_(p), rng_(rng), all_features_(X.cols()) {
        std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    }

    std::vector<TreeNode> build(std::vector<std::size_t> rows) {
        grow(std::move(rows), 0);
        return std::move(nodes_);
    }

private:
    double weight(std::size_t r) const { return w_.empty() ? 1.0 : w_[r]; }

    std::vector<std::size_t> candidate_features() {
        const std::size_t d = X_.cols();
        if (p_.features_per_split == 0 || p_.features_per_split >= d) return all_features_;
        std::vector<std::size_t> f = all_features_;
        for (std::size_t i = 0; i < p_.features_per_split; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, d - 1);
            std::swap(f[i], f[pick(rng_)]);
        }
        f.resize(p_.features_per_split);
        std::sort(f.begin(), f.end());
        return f;
    }

    int grow(std::vector<std::size_t> rows, std::size_t depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        std::vector<double> cw(C_, 0.0);
        for (auto r : rows) cw[static_cast<std::size_t>(y_[r])] += weight(r);
        const double total = std::accumulate(cw.begin(), cw.end(), 0.0);
        const auto occupied = std::count_if(cw.begin(), cw.end(), [](double v) { return v > 0.0; });

        auto make_leaf = [&] {
            nodes_[static_cast<std::size_t>(id)].counts = cw;
            return id;
        };
        if (depth >= p_.max_depth || rows.size() < 2 || occupied <= 1) return make_leaf();

        const double parent = gini(cw) * total;
        double best_gain = -std::numeric_limits<double>::infinity();
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;

        std::vector<std::size_t> sorted = rows;
        std::vector<double> left(C_), right(C_);
        for (auto f : candidate_features()) {
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                const double xa = X_(a, f), xb = X_(b, f);
                return xa < xb || (xa == xb && a < b);
            });
            std::fill(left.begin(), left.end(), 0.0);
            right = cw;
            double wl = 0.0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                const auto r = sorted[i];
                const double wr = weight(r);
                left[static_cast<std::size_t>(y_[r])] += wr;
                right[static_cast<std::size_t>(y_[r])] -= wr;
                wl += wr;
                const double lo = X_(r, f), hi = X_(sorted[i + 1], f);
                if (!(lo < hi)) continue;
                double thr = lo + (hi - lo) / 2.0;
                if (!(thr < hi)) thr = lo;
                const double gain = parent - (gini(left) * wl + gini(right) * (total - wl));
                if (gain > best_gain || (gain == best_gain && (f < best_feature ||
                                                              (f == best_feature && thr < best_threshold)))) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = thr;
                    found = true;
                }
            }
        }
        // Zero-gain splits are kept (XOR-like structure needs them); the
        // tolerance absorbs rounding in the impurity arithmetic.
        if (!found || best_gain < -1e-12 * std::max(1.0, total)) return make_leaf();

        std::vector<std::size_t> lrows, rrows;
        for (auto r : rows) (X_(r, best_feature) <= best_threshold ? lrows : rrows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(std::move(lrows), depth + 1);
        const int r = grow(std::move(rrows), depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = static_cast<int>(best_feature);
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    const Matrix& X_;
    std::span<const int> y_;
    std::span<const double> w_;
    std::size_t C_;
    const TreeParams& p_;
    std::mt19937_64& rng_;
    std::vector<std::size_t> all_features_;
    std::vector<TreeNode> nodes_;
};

nlohmann::json trees_to_json(const std::vector<DecisionTree>& trees) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : trees) arr.push_back(t.to_json());
    return arr;
}

std::vector<DecisionTree> trees_from_json(const nlohmann::json& arr) {
    std::vector<DecisionTree> out;
    for (const auto& t : arr) out.push_back(DecisionTree::from_json(t));
    return out;
}

}  // namespace

double gini(std::span<const double> class_weights) {
    const double total = std::accumulate(class_weights.begin(), class_weights.end(), 0.0);
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : class_weights) s += (c / total) * (c / total);
    return 1.0 - s;
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t num_classes)
    : nodes_(std::move(nodes)), num_classes_(num_classes) {
    if (nodes_.empty()) throw DataError("a decision tree needs at least one node");
    const auto n = static_cast<int>(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& nd = nodes_[i];
        if (nd.is_leaf()) {
            if (nd.counts.size() != num_classes_) throw DataError("leaf class-count size mismatch");
            for (double c : nd.counts)
                if (!(c >= 0.0)) throw DataError("leaf holds a negative class count");
        } else if (nd.left <= static_cast<int>(i) || nd.right <= static_cast<int>(i) || nd.left >= n ||
                   nd.right >= n) {
            // Children always come after their parent, which rules out cycles.
            throw DataError("malformed tree: child index out of order");
        }
    }
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return best;
}

std::vector<double> DecisionTree::leaf_distribution(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& nd = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
    }
    std::vector<double> p = nodes_[i].counts;
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (total > 0.0) {
        for (auto& v : p) v /= total;
    } else {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    }
    return p;
}

int DecisionTree::predict(std::span<const double> x) const {
    auto p = leaf_distribution(x);
    return static_cast<int>(argmax(p));
}

Matrix DecisionTree::predict_proba(const Matrix& X) const {
    Matrix out(X.rows(), num_classes_);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto p = leaf_distribution(X.row(r));
        std::copy(p.begin(), p.end(), out.row(r).begin());
    }
    return out;
}

nlohmann::json DecisionTree::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_) {
        if (n.is_leaf())
            nodes.push_back({{"counts", n.counts}});
        else
            nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
    return {{"num_classes", num_classes_}, {"nodes", nodes}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
    std::vector<TreeNode> nodes;
    for (const auto& jn : j.at("nodes")) {
        TreeNode n;
        if (jn.contains("counts")) {
            n.counts = jn.at("counts").get<std::vector<double>>();
        } else {
            n.feature = jn.at("feature").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
        }
        nodes.push_back(std::move(n));
    }
    return DecisionTree(std::move(nodes), j.at("num_classes").get<std::size_t>());
}

DecisionTree fit_tree_on_rows(const Matrix& X, std::span<const int> y, std::size_t num_classes,
                              std::span<const std::size_t> rows, const TreeParams& params, std::mt19937_64& rng,
                              std::span<const double> weights) {
    check_xy(X, y, num_classes);
    if (rows.empty()) throw DataError("cannot fit a tree on zero rows");
    if (!weights.empty() && weights.size() != X.rows()) throw DataError("weight count differs from row count");
    TreeBuilder b(X, y, weights, num_classes, params, rng);
    return DecisionTree(b.build({rows.begin(), rows.end()}), num_classes);
}

DecisionTree fit_tree(const Matrix& X, std::span<const int> y, std::size_t num_classes, const TreeParams& params,
                      std::mt19937_64& rng, std::span<const double> weights) {
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_tree_on_rows(X, y, num_classes, rows, params, rng, weights);
}

RandomForest::RandomForest(std::vector<DecisionTree> trees, std::size_t num_classes)
    : trees_(std::move(trees)), num_classes_(num_classes) {
    if (trees_.empty()) throw DataError("a forest needs at least one tree");
}

Matrix RandomForest::predict_proba(const Matrix& X) const {
    Matrix out(X.rows(), num_classes_);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto row = out.row(r);
        for (const auto& t : trees_) {
            auto p = t.leaf_distribution(X.row(r));
            for (std::size_t c = 0; c < num_classes_; ++c) row[c] += p[c];
        }
        for (auto& v : row) v /= static_cast<double>(trees_.size());
    }
    return out;
}

nlohmann::json RandomForest::to_json() const {
    return {{"type", "random_forest"}, {"num_classes", num_classes_}, {"trees", trees_to_json(trees_)}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
    return RandomForest(trees_from_json(j.at("trees")), j.at("num_classes").get<std::size_t>());
}

RandomForest fit_forest(const Matrix& X, std::span<const int> y, std::size_t num_classes, const ForestConfig& cfg) {
    check_xy(X, y, num_classes);
    if (cfg.n_estimators < 1) throw ConfigError("n_estimators must be at least 1");
    TreeParams params{cfg.max_depth, cfg.features_per_split};
    if (params.features_per_split == 0)
        params.features_per_split = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(X.cols()))));
    std::vector<DecisionTree> trees(cfg.n_estimators);
    const std::size_t n = X.rows();
    parallel_for(cfg.n_estimators, cfg.workers, [&](std::size_t i) {
        std::mt19937_64 rng(derive_seed(cfg.seed, i));
        std::vector<std::size_t> rows(n);
        if (cfg.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& r : rows) r = pick(rng);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        trees[i] = fit_tree_on_rows(X, y, num_classes, rows, params, rng);
    });
    return RandomForest(std::move(trees), num_classes);
}

RusBoost::RusBoost(std::vector<DecisionTree> stages, std::vector<double> alphas, std::size_t num_classes)
    : stages_(std::move(stages)), alphas_(std::move(alphas)), num_classes_(num_classes) {
    if (stages_.empty() || stages_.size() != alphas_.size())
        throw DataError("boosted ensemble needs one alpha per stage and at least one stage");
}

Matrix RusBoost::predict_proba(const Matrix& X) const {
    Matrix out(X.rows(), num_classes_);
    const double total = std::accumulate(alphas_.begin(), alphas_.end(), 0.0);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t m = 0; m < stages_.size(); ++m)
            row[static_cast<std::size_t>(stages_[m].predict(X.row(r)))] += alphas_[m];
        for (auto& v : row) v /= total;
    }
    return out;
}

nlohmann::json RusBoost::to_json() const {
    return {{"type", "rusboost"},
            {"num_classes", num_classes_},
            {"alphas", alphas_},
            {"trees", trees_to_json(stages_)}};
}

RusBoost RusBoost::from_json(const nlohmann::json& j) {
    return RusBoost(trees_from_json(j.at("trees")), j.at("alphas").get<std::vector<double>>(),
                    j.at("num_classes").get<std::size_t>());
}

std::vector<std::size_t> balanced_undersample(std::span<const int> y, std::size_t num_classes, std::mt19937_64& rng) {
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t i = 0; i < y.size(); ++i) by_class[static_cast<std::size_t>(y[i])].push_back(i);
    std::size_t minority = y.size();
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (by_class[c].empty()) throw DataError("class " + std::to_string(c) + " has no samples");
        minority = std::min(minority, by_class[c].size());
    }
    std::vector<std::size_t> out;
    out.reserve(minority * num_classes);
    for (auto& members : by_class) {
        for (std::size_t i = 0; i < minority; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
            std::swap(members[i], members[pick(rng)]);
        }
        std::sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(minority));
        out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(minority));
    }
    return out;
}

RusBoost fit_rusboost(const Matrix& X, std::span<const int> y, std::size_t num_classes, const RusBoostConfig& cfg) {
    check_xy(X, y, num_classes);
    if (num_classes < 2) throw ConfigError("boosting needs at least 2 classes");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (cfg.n_estimators < 1) throw ConfigError("n_estimators must be at least 1");
    constexpr int kMaxRetries = 10;
    constexpr double kMinError = 1e-10;

    const std::size_t n = X.rows();
    const double C = static_cast<double>(num_classes);
    std::mt19937_64 rng(cfg.seed);
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<DecisionTree> stages;
    std::vector<double> alphas;
    TreeParams params{cfg.max_depth, 0};
    std::vector<char> miss(n);

    for (std::size_t m = 0; m < cfg.n_estimators; ++m) {
        bool accepted = false;
        bool perfect = false;
        DecisionTree tree;
        for (int attempt = 0; attempt <= kMaxRetries && !accepted; ++attempt) {
            auto rows = balanced_undersample(y, num_classes, rng);
            tree = fit_tree_on_rows(X, y, num_classes, rows, params, rng, w);
            double err = 0.0, total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                miss[i] = tree.predict(X.row(i)) != y[i];
                if (miss[i]) err += w[i];
                total += w[i];
            }
            err /= total;
            if (err >= 1.0 - 1.0 / C) continue;
            accepted = true;
            perfect = err <= 0.0;
            const double e = std::max(err, kMinError);
            const double alpha = cfg.learning_rate * (std::log((1.0 - e) / e) + std::log(C - 1.0));
            stages.push_back(tree);
            alphas.push_back(alpha);
            double z = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (miss[i]) w[i] *= std::exp(alpha);
                z += w[i];
            }
            for (auto& v : w) v /= z;
        }
        if (!accepted) {
            // No usable stage after all retries: keep the last tree so the
            // ensemble is never empty, then stop.
            if (stages.empty()) {
                stages.push_back(tree);
                alphas.push_back(1.0);
            }
            break;
        }
        if (perfect) break;
    }
    return RusBoost(std::move(stages), std::move(alphas), num_classes);
}

}  // namespace fluhost::ensemble
