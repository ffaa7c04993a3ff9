#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "fluhost/ensemble.hpp"
#include "fluhost/error.hpp"
#include "generators.hpp"

using namespace fluhost;
using namespace fluhost::ensemble;

namespace {

struct Data {
    Matrix X;
    std::vector<int> y;
};

// Every first split has zero gain; the tie rule must still pick one.
Data xor_data(std::size_t per_corner) {
    Data d{Matrix(4 * per_corner, 2), {}};
    std::size_t r = 0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (std::size_t k = 0; k < per_corner; ++k, ++r) {
                d.X(r, 0) = a;
                d.X(r, 1) = b;
                d.y.push_back(a ^ b);
            }
    return d;
}

Data tie_heavy_data(gen::Rng& rng, std::size_t n, std::size_t d, int C) {
    Data out{Matrix(n, d), gen::labels(rng, n, C)};
    for (auto& v : out.X.data()) v = static_cast<double>(gen::uniform(rng, 0, 6));  // many ties
    return out;
}

double gini_oracle(const std::vector<double>& c) {
    double t = 0.0;
    for (double v : c) t += v;
    if (t == 0.0) return 0.0;
    double s = 1.0;
    for (double v : c) s -= (v / t) * (v / t);
    return s;
}

// Routes each training row and checks leaf counts and non-negative gain.
void check_tree_invariants(const DecisionTree& tree, const Data& d, std::size_t C) {
    const auto& nodes = tree.nodes();
    std::vector<std::vector<double>> counts(nodes.size(), std::vector<double>(C, 0.0));
    for (std::size_t r = 0; r < d.X.rows(); ++r) {
        int n = 0;
        counts[0][d.y[r]] += 1;
        while (!nodes[n].is_leaf()) {
            n = d.X(r, nodes[n].feature) <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
            counts[n][d.y[r]] += 1;
        }
    }
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        double w = 0.0;
        for (double v : counts[n]) w += v;
        if (nodes[n].is_leaf()) {
            EXPECT_EQ(nodes[n].counts, counts[n]);
            continue;
        }
        double wl = 0.0, wr = 0.0;
        for (double v : counts[nodes[n].left]) wl += v;
        for (double v : counts[nodes[n].right]) wr += v;
        EXPECT_GT(wl, 0.0);
        EXPECT_GT(wr, 0.0);
        EXPECT_LE(wl * gini_oracle(counts[nodes[n].left]) + wr * gini_oracle(counts[nodes[n].right]),
                  w * gini_oracle(counts[n]) + 1e-9);
    }
}

}  // namespace

TEST(Gini, MatchesOracle) {
    gen::Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> c(gen::uniform(rng, 1, 6));
        for (auto& v : c) v = gen::real(rng, 0, 10);
        EXPECT_NEAR(gini(c), gini_oracle(c), 1e-12);
    }
    EXPECT_EQ(gini(std::vector<double>{5, 0}), 0.0);
    EXPECT_DOUBLE_EQ(gini(std::vector<double>{1, 1}), 0.5);
}

TEST(Tree, SolvesXorAtDepthTwo) {
    auto d = xor_data(10);
    std::mt19937_64 rng(0);
    auto tree = fit_tree(d.X, d.y, 2, {2, 0}, rng);
    EXPECT_LE(tree.depth(), 2u);
    for (std::size_t r = 0; r < d.X.rows(); ++r) EXPECT_EQ(tree.predict(d.X.row(r)), d.y[r]);
}

TEST(Tree, InvariantsOnRandomData) {
    gen::Rng rng(2);
    for (int t = 0; t < 30; ++t) {
        std::size_t C = gen::uniform(rng, 2, 4);
        auto d = tie_heavy_data(rng, gen::uniform(rng, 5, 80), gen::uniform(rng, 1, 5), static_cast<int>(C));
        TreeParams p{gen::uniform(rng, 1, 6), 0};
        std::mt19937_64 trng(t);
        auto tree = fit_tree(d.X, d.y, C, p, trng);
        EXPECT_LE(tree.depth(), p.max_depth);
        check_tree_invariants(tree, d, C);
        auto proba = tree.predict_proba(d.X);
        for (std::size_t r = 0; r < proba.rows(); ++r) {
            double s = 0.0;
            for (double v : proba.row(r)) s += v;
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
        auto back = DecisionTree::from_json(tree.to_json());
        EXPECT_EQ(back.to_json(), tree.to_json());
    }
}

TEST(Tree, DeepTreeFitsDistinctPoints) {
    gen::Rng rng(3);
    Data d{Matrix(40, 3), gen::labels(rng, 40, 3)};
    for (auto& v : d.X.data()) v = gen::real(rng);
    std::mt19937_64 trng(1);
    auto tree = fit_tree(d.X, d.y, 3, {40, 0}, trng);
    for (std::size_t r = 0; r < 40; ++r) EXPECT_EQ(tree.predict(d.X.row(r)), d.y[r]);
}

TEST(Tree, ConstantFeaturesGiveClassPrior) {
    Matrix X(8, 2, 1.5);
    std::vector<int> y{0, 1, 1, 2, 1, 0, 1, 1};
    std::mt19937_64 rng(0);
    auto tree = fit_tree(X, y, 3, {}, rng);
    EXPECT_EQ(tree.depth(), 0u);
    auto p = tree.predict_proba(X);
    for (std::size_t r = 0; r < 8; ++r) {
        EXPECT_DOUBLE_EQ(p(r, 0), 2.0 / 8.0);
        EXPECT_DOUBLE_EQ(p(r, 1), 5.0 / 8.0);
        EXPECT_DOUBLE_EQ(p(r, 2), 1.0 / 8.0);
    }
}

TEST(Tree, RejectsBadInput) {
    std::mt19937_64 rng(0);
    Matrix X(3, 2);
    std::vector<int> y{0, 1};
    EXPECT_THROW(fit_tree(X, y, 2, {}, rng), DataError);
    std::vector<int> y3{0, 1, 5};
    EXPECT_THROW(fit_tree(X, y3, 2, {}, rng), DataError);
    EXPECT_THROW(DecisionTree({}, 2), DataError);
}

TEST(Forest, DeterministicAcrossWorkerCounts) {
    gen::Rng rng(4);
    auto d = tie_heavy_data(rng, 120, 6, 3);
    ForestConfig cfg;
    cfg.n_estimators = 12;
    cfg.seed = 5;
    auto a = fit_forest(d.X, d.y, 3, cfg);
    cfg.workers = 3;
    auto b = fit_forest(d.X, d.y, 3, cfg);
    EXPECT_EQ(a.to_json(), b.to_json());
    EXPECT_EQ(a.predict_proba(d.X), b.predict_proba(d.X));
    cfg.seed = 6;
    EXPECT_NE(fit_forest(d.X, d.y, 3, cfg).to_json(), a.to_json());
    auto back = RandomForest::from_json(a.to_json());
    EXPECT_EQ(back.predict_proba(d.X), a.predict_proba(d.X));
}

TEST(Forest, ProbaIsMeanOfTrees) {
    gen::Rng rng(5);
    auto d = tie_heavy_data(rng, 50, 4, 2);
    ForestConfig cfg;
    cfg.n_estimators = 5;
    auto f = fit_forest(d.X, d.y, 2, cfg);
    auto p = f.predict_proba(d.X);
    for (std::size_t r = 0; r < 50; ++r) {
        double m = 0.0;
        for (const auto& t : f.trees()) m += t.leaf_distribution(d.X.row(r))[1];
        EXPECT_NEAR(p(r, 1), m / 5.0, 1e-12);
    }
}

TEST(Undersample, EqualCountsPerClass) {
    gen::Rng rng(6);
    for (int t = 0; t < 30; ++t) {
        auto y = gen::labels(rng, gen::uniform(rng, 10, 100), 3);
        std::vector<std::size_t> cnt(3, 0);
        for (int v : y) cnt[v]++;
        if (*std::min_element(cnt.begin(), cnt.end()) == 0) continue;
        auto m = *std::min_element(cnt.begin(), cnt.end());
        std::mt19937_64 r(t);
        auto idx = balanced_undersample(y, 3, r);
        ASSERT_EQ(idx.size(), 3 * m);
        EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(y[idx[i]], static_cast<int>(i / m));
    }
}

TEST(RusBoost, FitsAndRoundTrips) {
    gen::Rng rng(7);
    Data d{Matrix(200, 3), {}};
    for (std::size_t r = 0; r < 200; ++r) {
        int c = r < 180 ? 0 : 1;
        d.y.push_back(c);
        for (std::size_t j = 0; j < 3; ++j) d.X(r, j) = gen::real(rng) + (j == 0 && c ? 0.8 : 0.0);
    }
    RusBoostConfig cfg;
    cfg.n_estimators = 20;
    cfg.seed = 3;
    auto m = fit_rusboost(d.X, d.y, 2, cfg);
    EXPECT_GE(m.stages().size(), 1u);
    EXPECT_EQ(m.stages().size(), m.alphas().size());
    for (double a : m.alphas()) EXPECT_GT(a, 0.0);
    auto p = m.predict_proba(d.X);
    for (std::size_t r = 0; r < p.rows(); ++r) EXPECT_NEAR(p(r, 0) + p(r, 1), 1.0, 1e-12);
    EXPECT_EQ(fit_rusboost(d.X, d.y, 2, cfg).to_json(), m.to_json());
    EXPECT_EQ(RusBoost::from_json(m.to_json()).predict_proba(d.X), p);
    cfg.learning_rate = 0.0;
    EXPECT_THROW(fit_rusboost(d.X, d.y, 2, cfg), ConfigError);
}
