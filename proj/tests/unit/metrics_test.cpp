#include <gtest/gtest.h>

#include <cmath>

#include "fluhost/error.hpp"
#include "fluhost/eval/disagreement.hpp"
#include "fluhost/eval/metrics.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fluhost;
using namespace fluhost::eval;

namespace {

std::vector<std::string> names(int C) {
    std::vector<std::string> n;
    for (int c = 0; c < C; ++c) n.push_back("c" + std::to_string(c));
    return n;
}

}  // namespace

TEST(Confusion, CountsAndSums) {
    std::vector<int> t{0, 0, 1, 2, 2, 2}, p{0, 1, 1, 2, 0, 2};
    auto cm = confusion(t, p, names(3));
    EXPECT_EQ(cm(0, 0), 1u);
    EXPECT_EQ(cm(0, 1), 1u);
    EXPECT_EQ(cm(2, 0), 1u);
    EXPECT_EQ(cm.total(), 6u);
    EXPECT_EQ(cm.trace(), 4u);
    EXPECT_EQ(cm.row_sum(2), 3u);
    EXPECT_EQ(cm.col_sum(0), 2u);
    std::vector<std::string> ts{"c0", "c1"}, ps{"c1", "c1"};
    auto cs = confusion(ts, ps, names(2));
    EXPECT_EQ(cs(0, 1), 1u);
    std::vector<std::string> bad{"zz", "c1"};
    EXPECT_THROW(confusion(bad, ps, names(2)), DataError);
}

TEST(Metrics, RandomConfusionMatricesMatchOracle) {
    gen::Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        int C = static_cast<int>(gen::uniform(rng, 2, 6));
        auto n = gen::uniform(rng, 1, 200);
        auto t = gen::labels(rng, n, C), p = gen::labels(rng, n, C);
        auto cm = confusion(t, p, names(C));
        auto oc = oracle::tally(t, p, C);
        auto f1 = per_class_f1(cm);
        auto mcc = per_class_mcc(cm);
        for (int k = 0; k < C; ++k) {
            EXPECT_LE(std::abs(f1[k].value - oracle::f1(oc, k)), 1e-12);
            EXPECT_LE(std::abs(mcc[k].value - oracle::mcc(oc, k)), 1e-12);
            auto o = one_vs_all(cm, k);
            EXPECT_EQ(o.tp + o.fp + o.fn + o.tn, n);
        }
        EXPECT_LE(std::abs(overall_mcc(cm).value - oracle::overall_mcc(oc)), 1e-12);
    }
}

TEST(Metrics, OverallMccKnownValue) {
    std::vector<int> t{0, 0, 0, 1, 1, 1}, p{0, 0, 1, 0, 1, 1};
    auto cm = confusion(t, p, names(2));
    ASSERT_EQ(cm(0, 1), 1u);
    EXPECT_NEAR(overall_mcc(cm).value, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(per_class_mcc(cm)[0].value, 1.0 / 3.0, 1e-15);
}

TEST(Metrics, DegenerateScoresAreFlagged) {
    std::vector<int> t{0, 0, 0}, p{0, 0, 0};
    auto cm = confusion(t, p, names(2));
    EXPECT_TRUE(overall_mcc(cm).degenerate);
    EXPECT_EQ(overall_mcc(cm).value, 0.0);
    EXPECT_TRUE(per_class_precision(cm)[1].degenerate);
    EXPECT_TRUE(per_class_recall(cm)[1].degenerate);
    EXPECT_FALSE(per_class_recall(cm)[0].degenerate);
    EXPECT_EQ(per_class_recall(cm)[0].value, 1.0);
}

TEST(AveragePrecision, KnownValue) {
    std::vector<double> s{0.9, 0.8, 0.7};
    std::vector<int> pos{1, 0, 1};
    EXPECT_NEAR(average_precision(pr_curve(s, pos)), 5.0 / 6.0, 1e-15);
}

TEST(AveragePrecision, RandomScoresMatchOracle) {
    gen::Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        auto n = gen::uniform(rng, 1, 100);
        bool ties = trial % 2;
        std::vector<double> s(n);
        std::vector<int> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = ties ? static_cast<double>(gen::uniform(rng, 0, 5)) / 5.0 : gen::real(rng);
            pos[i] = static_cast<int>(gen::uniform(rng, 0, 1));
        }
        pos[0] = 1;
        auto curve = pr_curve(s, pos);
        EXPECT_LE(std::abs(average_precision(curve) - oracle::average_precision(s, pos)), 1e-12);
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            EXPECT_LT(curve.points[i].threshold, curve.points[i - 1].threshold);
            EXPECT_GE(curve.points[i].recall, curve.points[i - 1].recall);
        }
        EXPECT_DOUBLE_EQ(curve.points.back().recall, 1.0);
    }
}

TEST(AveragePrecision, RandomScorerNearPrevalence) {
    gen::Rng rng(12);
    for (double prevalence : {0.1, 0.3, 0.5}) {
        std::vector<double> s(1000);
        std::vector<int> pos(1000);
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i] = gen::real(rng);
            pos[i] = gen::real(rng) < prevalence;
        }
        double actual = 0.0;
        for (int v : pos) actual += v;
        actual /= 1000.0;
        EXPECT_NEAR(average_precision(pr_curve(s, pos)), actual, 0.05) << prevalence;
    }
}

TEST(AveragePrecision, Errors) {
    std::vector<double> s{0.5, 0.2};
    std::vector<int> none{0, 0};
    EXPECT_THROW(pr_curve(s, none), DataError);
    std::vector<double> nan{std::nan(""), 0.1};
    std::vector<int> one{1, 0};
    EXPECT_THROW(pr_curve(nan, one), DataError);
}

TEST(Micro, F1EqualsAccuracyAndAucprIsPooled) {
    gen::Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t C = gen::uniform(rng, 2, 5);
        auto n = gen::uniform(rng, 1, 120);
        auto y = gen::labels(rng, n, static_cast<int>(C));
        auto p = gen::proba(rng, n, C, trial % 2);
        auto m = micro_metrics(p, y);
        auto pred = argmax_rows(p);
        std::size_t ok = 0;
        for (std::size_t i = 0; i < n; ++i) ok += pred[i] == y[i];
        EXPECT_EQ(m.micro_f1, static_cast<double>(ok) / static_cast<double>(n));
        std::vector<int> pos(n * C, 0);
        for (std::size_t i = 0; i < n; ++i) pos[i * C + y[i]] = 1;
        EXPECT_LE(std::abs(m.micro_aucpr - oracle::average_precision(p.data(), pos)), 1e-12);
    }
}

TEST(Evaluate, ReportIsConsistent) {
    gen::Rng rng(4);
    auto y = gen::labels(rng, 90, 3);
    auto p = gen::proba(rng, 90, 3);
    auto rep = evaluate(p, y, names(3));
    EXPECT_NEAR(rep.mean_score, (rep.micro_aucpr + rep.micro_f1 + rep.overall_mcc.value) / 3.0, 1e-15);
    std::size_t support = 0;
    double base = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        support += rep.per_class[k].support;
        base += rep.per_class[k].baseline;
        std::vector<double> s;
        std::vector<int> pos;
        for (std::size_t i = 0; i < 90; ++i) {
            s.push_back(p(i, k));
            pos.push_back(y[i] == static_cast<int>(k));
        }
        EXPECT_LE(std::abs(rep.per_class[k].aucpr.value - oracle::average_precision(s, pos)), 1e-12);
    }
    EXPECT_EQ(support, 90u);
    EXPECT_NEAR(base, 1.0, 1e-12);
    auto j = rep.to_json();
    EXPECT_TRUE(j.contains("confusion"));
    auto csv = pr_curves_csv(p, y, names(3));
    EXPECT_EQ(csv.substr(0, 23), "class,recall,precision\n");
}

TEST(Evaluate, AverageSkipsDegenerateEntries) {
    std::vector<int> y1{0, 0, 1, 1}, y2{0, 0, 0, 0};
    Matrix p(4, 2);
    for (std::size_t i = 0; i < 4; ++i) p(i, i < 2 ? 0 : 1) = 1.0;
    auto a = evaluate(p, y1, names(2));
    auto b = evaluate(p, y2, names(2));
    EXPECT_TRUE(b.per_class[1].aucpr.degenerate);
    std::vector<MetricsReport> both{a, b};
    auto avg = average_reports(both);
    EXPECT_EQ(avg.per_class[1].aucpr.value, a.per_class[1].aucpr.value);
    EXPECT_FALSE(avg.per_class[1].aucpr.degenerate);
    EXPECT_EQ(avg.confusion.total(), 8u);
    EXPECT_NEAR(avg.micro_f1, (a.micro_f1 + b.micro_f1) / 2.0, 1e-15);
    std::vector<MetricsReport> only_b{b};
    EXPECT_TRUE(average_reports(only_b).per_class[1].aucpr.degenerate);
}

TEST(Disagreement, PartitionsRecords) {
    std::vector<int> y{0, 1, 1, 0};
    std::vector<std::pair<std::string, std::vector<int>>> preds{{"a", {0, 1, 0, 1}}, {"b", {0, 0, 0, 0}}};
    auto r = ensemble_disagreement(preds, y);
    EXPECT_EQ(r.all_correct, (std::vector<std::size_t>{0}));
    EXPECT_EQ(r.mixed, (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(r.all_wrong, (std::vector<std::size_t>{2}));
    ASSERT_EQ(r.wrong_detail.size(), 1u);
    EXPECT_EQ(r.wrong_detail[0].predictions, (std::vector<int>{0, 0}));
    auto csv = r.wrong_csv({"r0", "r1", "r2", "r3"}, names(2));
    EXPECT_NE(csv.find("r2"), std::string::npos);
}
