#include "fluhost/eval/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "fluhost/error.hpp"
#include "fluhost/util.hpp"

namespace fluhost::eval {

namespace {

Score ratio(double num, double den) {
    if (den == 0.0) return {0.0, true};
    return {num / den, false};
}

nlohmann::json score_json(const Score& s) {
    nlohmann::json j = s.value;
    return s.degenerate ? nlohmann::json{{"value", s.value}, {"degenerate", true}} : j;
}

void check_label(int l, std::size_t C) {
    if (l < 0 || static_cast<std::size_t>(l) >= C)
        throw DataError("label " + std::to_string(l) + " is not a known class index");
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : names_(std::move(class_names)), counts_(names_.size() * names_.size(), 0) {}

std::size_t ConfusionMatrix::total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const noexcept {
    std::size_t s = 0;
    for (std::size_t k = 0; k < names_.size(); ++k) s += (*this)(k, k);
    return s;
}

std::size_t ConfusionMatrix::row_sum(std::size_t t) const {
    std::size_t s = 0;
    for (std::size_t p = 0; p < names_.size(); ++p) s += (*this)(t, p);
    return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t p) const {
    std::size_t s = 0;
    for (std::size_t t = 0; t < names_.size(); ++t) s += (*this)(t, p);
    return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.names_ != names_) throw DataError("cannot add confusion matrices over different classes");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

nlohmann::json ConfusionMatrix::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t t = 0; t < names_.size(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t p = 0; p < names_.size(); ++p) row.push_back((*this)(t, p));
        rows.push_back(row);
    }
    return {{"classes", names_}, {"counts", rows}};
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          std::vector<std::string> class_names) {
    if (y_true.size() != y_pred.size())
        throw DataError(std::to_string(y_true.size()) + " true labels but " + std::to_string(y_pred.size()) +
                        " predictions");
    ConfusionMatrix cm(std::move(class_names));
    const std::size_t C = cm.num_classes();
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        check_label(y_true[i], C);
        check_label(y_pred[i], C);
        cm(static_cast<std::size_t>(y_true[i]), static_cast<std::size_t>(y_pred[i]))++;
    }
    return cm;
}

ConfusionMatrix confusion(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                          std::vector<std::string> class_names) {
    auto index = [&](const std::string& s) {
        auto it = std::find(class_names.begin(), class_names.end(), s);
        if (it == class_names.end()) throw DataError("unknown label '" + s + "'");
        return static_cast<int>(it - class_names.begin());
    };
    std::vector<int> t, p;
    for (const auto& s : y_true) t.push_back(index(s));
    for (const auto& s : y_pred) p.push_back(index(s));
    return confusion(t, p, std::move(class_names));
}

OneVsAll one_vs_all(const ConfusionMatrix& cm, std::size_t k) {
    OneVsAll o;
    o.tp = cm(k, k);
    o.fn = cm.row_sum(k) - o.tp;
    o.fp = cm.col_sum(k) - o.tp;
    o.tn = cm.total() - o.tp - o.fn - o.fp;
    return o;
}

std::vector<Score> per_class_precision(const ConfusionMatrix& cm) {
    std::vector<Score> out;
    for (std::size_t k = 0; k < cm.num_classes(); ++k) {
        auto o = one_vs_all(cm, k);
        out.push_back(ratio(static_cast<double>(o.tp), static_cast<double>(o.tp + o.fp)));
    }
    return out;
}

std::vector<Score> per_class_recall(const ConfusionMatrix& cm) {
    std::vector<Score> out;
    for (std::size_t k = 0; k < cm.num_classes(); ++k) {
        auto o = one_vs_all(cm, k);
        out.push_back(ratio(static_cast<double>(o.tp), static_cast<double>(o.tp + o.fn)));
    }
    return out;
}

std::vector<Score> per_class_f1(const ConfusionMatrix& cm) {
    std::vector<Score> out;
    for (std::size_t k = 0; k < cm.num_classes(); ++k) {
        auto o = one_vs_all(cm, k);
        out.push_back(ratio(2.0 * static_cast<double>(o.tp), static_cast<double>(2 * o.tp + o.fp + o.fn)));
    }
    return out;
}

std::vector<Score> per_class_mcc(const ConfusionMatrix& cm) {
    std::vector<Score> out;
    for (std::size_t k = 0; k < cm.num_classes(); ++k) {
        auto o = one_vs_all(cm, k);
        const double tp = static_cast<double>(o.tp), tn = static_cast<double>(o.tn);
        const double fp = static_cast<double>(o.fp), fn = static_cast<double>(o.fn);
        const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
        if (den == 0.0) {
            out.push_back({0.0, true});
            continue;
        }
        const double v = (tp * tn - fp * fn) / std::sqrt(den);
        out.push_back({std::clamp(v, -1.0, 1.0), false});
    }
    return out;
}

Score overall_mcc(const ConfusionMatrix& cm) {
    const double s = static_cast<double>(cm.total());
    const double c = static_cast<double>(cm.trace());
    double pt = 0.0, pp = 0.0, tt = 0.0;
    for (std::size_t k = 0; k < cm.num_classes(); ++k) {
        const double p = static_cast<double>(cm.col_sum(k));
        const double t = static_cast<double>(cm.row_sum(k));
        pt += p * t;
        pp += p * p;
        tt += t * t;
    }
    const double a = s * s - pp, b = s * s - tt;
    if (a <= 0.0 || b <= 0.0) return {0.0, true};
    return {std::clamp((c * s - pt) / (std::sqrt(a) * std::sqrt(b)), -1.0, 1.0), false};
}

PrCurve pr_curve(std::span<const double> scores, std::span<const int> positive) {
    if (scores.size() != positive.size())
        throw DataError(std::to_string(scores.size()) + " scores but " + std::to_string(positive.size()) + " labels");
    PrCurve curve;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw DataError("non-finite score at index " + std::to_string(i));
        if (positive[i]) ++curve.positive_count;
    }
    if (curve.positive_count == 0) throw DataError("precision-recall curve needs at least one positive");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const double P = static_cast<double>(curve.positive_count);
    std::size_t tp = 0, seen = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double thr = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == thr; ++i) {
            ++seen;
            if (positive[order[i]]) ++tp;
        }
        curve.points.push_back({thr, static_cast<double>(tp) / P, static_cast<double>(tp) / static_cast<double>(seen)});
    }
    return curve;
}

double average_precision(const PrCurve& curve) {
    double ap = 0.0, prev = 0.0;
    for (const auto& pt : curve.points) {
        ap += (pt.recall - prev) * pt.precision;
        prev = pt.recall;
    }
    return std::clamp(ap, 0.0, 1.0);
}

std::vector<int> argmax_rows(const Matrix& proba) {
    std::vector<int> out(proba.rows());
    for (std::size_t r = 0; r < proba.rows(); ++r) out[r] = static_cast<int>(argmax(proba.row(r)));
    return out;
}

MicroMetrics micro_metrics(const Matrix& proba, std::span<const int> y_true) {
    if (proba.rows() != y_true.size())
        throw DataError(std::to_string(proba.rows()) + " probability rows but " + std::to_string(y_true.size()) +
                        " labels");
    const std::size_t C = proba.cols();
    if (C == 0 || y_true.empty()) throw DataError("micro metrics need at least one record and one class");
    for (int l : y_true) check_label(l, C);

    auto pred = argmax_rows(proba);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (pred[i] == y_true[i]) {
            ++tp;
        } else {
            ++fp;
            ++fn;
        }
    }
    MicroMetrics m;
    m.micro_f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);

    std::vector<int> pos(proba.data().size());
    for (std::size_t i = 0; i < y_true.size(); ++i) pos[i * C + static_cast<std::size_t>(y_true[i])] = 1;
    m.micro_aucpr = average_precision(pr_curve(proba.data(), pos));
    return m;
}

MetricsReport evaluate(const Matrix& proba, std::span<const int> y_true,
                       const std::vector<std::string>& class_names) {
    if (proba.cols() != class_names.size())
        throw DataError(std::to_string(proba.cols()) + " probability columns for " +
                        std::to_string(class_names.size()) + " classes");
    MetricsReport rep;
    auto micro = micro_metrics(proba, y_true);
    rep.micro_f1 = micro.micro_f1;
    rep.micro_aucpr = micro.micro_aucpr;
    auto pred = argmax_rows(proba);
    rep.confusion = confusion(y_true, pred, class_names);
    rep.overall_mcc = overall_mcc(rep.confusion);
    rep.mean_score = (rep.micro_aucpr + rep.micro_f1 + rep.overall_mcc.value) / 3.0;

    auto prec = per_class_precision(rep.confusion);
    auto rec = per_class_recall(rep.confusion);
    auto f1 = per_class_f1(rep.confusion);
    auto mcc = per_class_mcc(rep.confusion);
    const double n = static_cast<double>(y_true.size());
    std::vector<double> col(y_true.size());
    std::vector<int> pos(y_true.size());
    for (std::size_t k = 0; k < class_names.size(); ++k) {
        ClassMetrics cm;
        cm.label = class_names[k];
        cm.support = rep.confusion.row_sum(k);
        cm.precision = prec[k];
        cm.recall = rec[k];
        cm.f1 = f1[k];
        cm.mcc = mcc[k];
        cm.baseline = static_cast<double>(cm.support) / n;
        if (cm.support == 0) {
            cm.aucpr = {0.0, true};
        } else {
            for (std::size_t i = 0; i < y_true.size(); ++i) {
                col[i] = proba(i, k);
                pos[i] = y_true[i] == static_cast<int>(k);
            }
            cm.aucpr = {average_precision(pr_curve(col, pos)), false};
        }
        rep.per_class.push_back(std::move(cm));
    }
    return rep;
}

MetricsReport average_reports(std::span<const MetricsReport> reports) {
    if (reports.empty()) throw DataError("no reports to average");
    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
        void add(const Score& s) {
            if (!s.degenerate) {
                sum += s.value;
                ++n;
            }
        }
        Score get() const { return n ? Score{sum / static_cast<double>(n), false} : Score{0.0, true}; }
    };
    const auto& first = reports.front();
    const std::size_t C = first.per_class.size();
    MetricsReport out;
    out.confusion = ConfusionMatrix(first.confusion.class_names());
    std::vector<std::array<Acc, 5>> acc(C);
    std::vector<double> base(C, 0.0);
    Acc omcc;
    double f1 = 0.0, ap = 0.0;
    for (const auto& r : reports) {
        if (r.per_class.size() != C) throw DataError("cannot average reports over different class sets");
        out.confusion += r.confusion;
        f1 += r.micro_f1;
        ap += r.micro_aucpr;
        omcc.add(r.overall_mcc);
        for (std::size_t k = 0; k < C; ++k) {
            const auto& c = r.per_class[k];
            acc[k][0].add(c.precision);
            acc[k][1].add(c.recall);
            acc[k][2].add(c.f1);
            acc[k][3].add(c.mcc);
            acc[k][4].add(c.aucpr);
            base[k] += c.baseline;
        }
    }
    const double n = static_cast<double>(reports.size());
    for (std::size_t k = 0; k < C; ++k) {
        ClassMetrics c;
        c.label = first.per_class[k].label;
        c.support = out.confusion.row_sum(k);
        c.precision = acc[k][0].get();
        c.recall = acc[k][1].get();
        c.f1 = acc[k][2].get();
        c.mcc = acc[k][3].get();
        c.aucpr = acc[k][4].get();
        c.baseline = base[k] / n;
        out.per_class.push_back(std::move(c));
    }
    out.micro_f1 = f1 / n;
    out.micro_aucpr = ap / n;
    out.overall_mcc = omcc.get();
    out.mean_score = (out.micro_aucpr + out.micro_f1 + out.overall_mcc.value) / 3.0;
    return out;
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json pc = nlohmann::json::object();
    for (const auto& c : per_class)
        pc[c.label] = {{"support", c.support},     {"precision", score_json(c.precision)},
                       {"recall", score_json(c.recall)}, {"f1", score_json(c.f1)},
                       {"mcc", score_json(c.mcc)},       {"aucpr", score_json(c.aucpr)},
                       {"baseline", c.baseline}};
    return {{"per_class", pc},
            {"overall",
             {{"micro_f1", micro_f1},
              {"micro_aucpr", micro_aucpr},
              {"overall_mcc", score_json(overall_mcc)},
              {"mean_score", mean_score}}},
            {"confusion", confusion.to_json()}};
}

std::string pr_curves_csv(const Matrix& proba, std::span<const int> y_true,
                          const std::vector<std::string>& class_names) {
    if (proba.rows() != y_true.size() || proba.cols() != class_names.size())
        throw DataError("probability matrix shape does not match labels and classes");
    std::string out = "class,recall,precision\n";
    std::vector<double> col(y_true.size());
    std::vector<int> pos(y_true.size());
    char buf[96];
    for (std::size_t k = 0; k < class_names.size(); ++k) {
        bool any = false;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            col[i] = proba(i, k);
            pos[i] = y_true[i] == static_cast<int>(k);
            any = any || pos[i];
        }
        if (!any) continue;
        for (const auto& pt : pr_curve(col, pos).points) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", pt.recall, pt.precision);
            out += class_names[k];
            out += buf;
        }
    }
    return out;
}

}  // namespace fluhost::eval
