#include "fluhost/eval/cv.hpp"

#include <algorithm>
#include <random>

#include "fluhost/error.hpp"
#include "fluhost/util.hpp"

namespace fluhost::eval {

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed) {
    if (k < 2) throw ConfigError("k must be at least 2, got " + std::to_string(k));
    if (k > labels.size())
        throw DataError("cannot split " + std::to_string(labels.size()) + " records into " + std::to_string(k) +
                        " folds");
    int max_label = -1;
    for (int l : labels) {
        if (l < 0) throw DataError("negative class label " + std::to_string(l));
        max_label = std::max(max_label, l);
    }
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(max_label) + 1);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t pos = 0;
    for (auto& members : by_class) {
        for (std::size_t i = members.size(); i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(members[i - 1], members[pick(rng)]);
        }
        for (auto m : members) folds[pos++ % k].push_back(m);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

std::vector<std::size_t> CvPlan::outer_test(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < outer.size(); ++r)
        if (outer[r] == static_cast<int>(f)) out.push_back(r);
    return out;
}

std::vector<std::size_t> CvPlan::outer_train(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < outer.size(); ++r)
        if (outer[r] != static_cast<int>(f)) out.push_back(r);
    return out;
}

std::vector<std::size_t> CvPlan::inner_validation(std::size_t f, std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < outer.size(); ++r)
        if (inner[f][r] == static_cast<int>(i)) out.push_back(r);
    return out;
}

std::vector<std::size_t> CvPlan::inner_train(std::size_t f, std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < outer.size(); ++r)
        if (inner[f][r] >= 0 && inner[f][r] != static_cast<int>(i)) out.push_back(r);
    return out;
}

void CvPlan::validate(std::size_t n) const {
    if (k_outer < 2 || k_inner < 2) throw DataError("CV plan needs k_outer and k_inner of at least 2");
    if (outer.size() != n)
        throw DataError("CV plan covers " + std::to_string(outer.size()) + " records, data has " + std::to_string(n));
    if (inner.size() != k_outer) throw DataError("CV plan needs one inner assignment per outer fold");
    std::vector<std::size_t> sizes(k_outer, 0);
    for (int f : outer) {
        if (f < 0 || static_cast<std::size_t>(f) >= k_outer) throw DataError("outer fold index out of range");
        ++sizes[static_cast<std::size_t>(f)];
    }
    for (std::size_t f = 0; f < k_outer; ++f) {
        if (sizes[f] == 0) throw DataError("outer fold " + std::to_string(f + 1) + " is empty");
        if (inner[f].size() != n) throw DataError("inner assignment size mismatch");
        for (std::size_t r = 0; r < n; ++r) {
            const int v = inner[f][r];
            const bool test_side = outer[r] == static_cast<int>(f);
            if (test_side != (v < 0) || v >= static_cast<int>(k_inner))
                throw DataError("inner fold assignment inconsistent with outer fold " + std::to_string(f + 1));
        }
    }
}

nlohmann::json CvPlan::to_json() const {
    return {{"k_outer", k_outer}, {"k_inner", k_inner}, {"seed", seed}, {"outer", outer}, {"inner", inner}};
}

CvPlan CvPlan::from_json(const nlohmann::json& j) {
    CvPlan p;
    try {
        p.k_outer = j.at("k_outer").get<std::size_t>();
        p.k_inner = j.at("k_inner").get<std::size_t>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.outer = j.at("outer").get<std::vector<int>>();
        p.inner = j.at("inner").get<std::vector<std::vector<int>>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed CV plan: ") + e.what());
    }
    p.validate(p.outer.size());
    return p;
}

CvPlan make_plan(std::span<const int> labels, std::size_t k_outer, std::size_t k_inner, std::uint64_t seed) {
    CvPlan p;
    p.k_outer = k_outer;
    p.k_inner = k_inner;
    p.seed = seed;
    p.outer.assign(labels.size(), -1);
    auto folds = stratified_kfold(labels, k_outer, seed);
    for (std::size_t f = 0; f < k_outer; ++f)
        for (auto r : folds[f]) p.outer[r] = static_cast<int>(f);
    for (std::size_t f = 0; f < k_outer; ++f) {
        auto train = p.outer_train(f);
        std::vector<int> sub(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) sub[i] = labels[train[i]];
        auto inner = stratified_kfold(sub, k_inner, derive_seed(seed, f + 1));
        std::vector<int> assign(labels.size(), -1);
        for (std::size_t i = 0; i < k_inner; ++i)
            for (auto local : inner[i]) assign[train[local]] = static_cast<int>(i);
        p.inner.push_back(std::move(assign));
    }
    return p;
}

nlohmann::json to_json(const HyperParams& hp) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : hp) j[k] = v;
    return j;
}

namespace {

Matrix run_fit(const FitPredict& fit, std::span<const std::size_t> train, std::span<const std::size_t> test,
               const HyperParams& hp, std::uint64_t seed, std::size_t num_classes, const std::string& context) {
    try {
        Matrix p = fit(train, test, hp, seed);
        if (p.rows() != test.size() || p.cols() != num_classes)
            throw DataError("model returned a " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
                            " probability matrix, expected " + std::to_string(test.size()) + "x" +
                            std::to_string(num_classes));
        return p;
    } catch (const DivergedTraining& e) {
        throw DivergedTraining(context + ": " + e.what(), e.epoch());
    }
}

std::vector<int> labels_at(std::span<const int> labels, std::span<const std::size_t> idx) {
    std::vector<int> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
    return out;
}

}  // namespace

NestedCvResult nested_cv(std::span<const int> labels, const std::vector<std::string>& class_names,
                         const FitPredict& fit, const std::vector<HyperParams>& grid, const CvPlan& plan,
                         std::size_t workers) {
    if (grid.empty()) throw ConfigError("hyperparameter grid is empty");
    plan.validate(labels.size());
    const std::size_t C = class_names.size();

    NestedCvResult res;
    res.grid = grid;
    res.folds.resize(plan.k_outer);
    parallel_for(plan.k_outer, workers, [&](std::size_t f) {
        OuterFold& of = res.folds[f];
        of.fold = f;
        const std::string where = "outer fold " + std::to_string(f + 1);
        if (grid.size() > 1) {
            for (std::size_t g = 0; g < grid.size(); ++g) {
                double total = 0.0;
                for (std::size_t i = 0; i < plan.k_inner; ++i) {
                    auto tr = plan.inner_train(f, i);
                    auto va = plan.inner_validation(f, i);
                    auto p = run_fit(fit, tr, va, grid[g], derive_seed(plan.seed, f + 1, 1 + g * plan.k_inner + i),
                                     C,
                                     where + ", grid point " + std::to_string(g + 1) + ", inner fold " +
                                         std::to_string(i + 1));
                    total += evaluate(p, labels_at(labels, va), class_names).mean_score;
                }
                of.inner_scores.push_back(total / static_cast<double>(plan.k_inner));
            }
            of.chosen = static_cast<std::size_t>(
                std::max_element(of.inner_scores.begin(), of.inner_scores.end()) - of.inner_scores.begin());
        }
        auto train = plan.outer_train(f);
        of.test = plan.outer_test(f);
        of.proba = run_fit(fit, train, of.test, grid[of.chosen], derive_seed(plan.seed, 1000 + f), C, where);
        of.report = evaluate(of.proba, labels_at(labels, of.test), class_names);
    });

    std::vector<MetricsReport> reports;
    res.oof_proba = Matrix(labels.size(), C);
    for (const auto& of : res.folds) {
        reports.push_back(of.report);
        for (std::size_t i = 0; i < of.test.size(); ++i) {
            auto src = of.proba.row(i);
            std::copy(src.begin(), src.end(), res.oof_proba.row(of.test[i]).begin());
        }
    }
    res.mean = average_reports(reports);
    res.pooled = evaluate(res.oof_proba, labels, class_names);
    return res;
}

nlohmann::json NestedCvResult::to_json() const {
    nlohmann::json jg = nlohmann::json::array();
    for (const auto& hp : grid) jg.push_back(eval::to_json(hp));
    nlohmann::json jf = nlohmann::json::array();
    for (const auto& of : folds)
        jf.push_back({{"fold", of.fold + 1},
                      {"test_size", of.test.size()},
                      {"hyperparams", eval::to_json(grid[of.chosen])},
                      {"inner_scores", of.inner_scores},
                      {"metrics", of.report.to_json()}});
    return {{"grid", jg}, {"outer_folds", jf}, {"mean", mean.to_json()}, {"pooled", pooled.to_json()}};
}

}  // namespace fluhost::eval
