#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluhost/matrix.hpp"

namespace fluhost::eval {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> class_names);

    std::size_t num_classes() const noexcept { return names_.size(); }
    const std::vector<std::string>& class_names() const noexcept { return names_; }

    std::size_t operator()(std::size_t t, std::size_t p) const { return counts_[t * names_.size() + p]; }
    std::size_t& operator()(std::size_t t, std::size_t p) { return counts_[t * names_.size() + p]; }

    std::size_t total() const noexcept;
    std::size_t trace() const noexcept;
    std::size_t row_sum(std::size_t t) const;
    std::size_t col_sum(std::size_t p) const;

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

    nlohmann::json to_json() const;

private:
    std::vector<std::string> names_;
    std::vector<std::size_t> counts_;
};

// Labels are class indices into `class_names`.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          std::vector<std::string> class_names);

// Same, with labels given by name.
ConfusionMatrix confusion(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                          std::vector<std::string> class_names);

// A metric value; `degenerate` marks a zero denominator, in which case value is 0.
struct Score {
    double value = 0.0;
    bool degenerate = false;
};

struct OneVsAll {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

OneVsAll one_vs_all(const ConfusionMatrix& cm, std::size_t k);

std::vector<Score> per_class_precision(const ConfusionMatrix& cm);
std::vector<Score> per_class_recall(const ConfusionMatrix& cm);
std::vector<Score> per_class_f1(const ConfusionMatrix& cm);
std::vector<Score> per_class_mcc(const ConfusionMatrix& cm);

// Multiclass (R_k) correlation coefficient.
Score overall_mcc(const ConfusionMatrix& cm);

struct PrPoint {
    double threshold;
    double recall;
    double precision;
};

struct PrCurve {
    std::vector<PrPoint> points;  // one per distinct score, descending threshold
    std::size_t positive_count = 0;
};

// Throws DataError when there are no positives.
PrCurve pr_curve(std::span<const double> scores, std::span<const int> positive);

// Step sum of precision over recall increments.
double average_precision(const PrCurve& curve);

struct MicroMetrics {
    double micro_f1 = 0.0;
    double micro_aucpr = 0.0;
};

// `proba` is records x classes; predictions are row argmaxes.
MicroMetrics micro_metrics(const Matrix& proba, std::span<const int> y_true);

std::vector<int> argmax_rows(const Matrix& proba);

struct ClassMetrics {
    std::string label;
    std::size_t support = 0;
    Score precision, recall, f1, mcc;
    Score aucpr;  // degenerate when the class has no positives
    double baseline = 0.0;  // class prevalence
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    ConfusionMatrix confusion;
    double micro_f1 = 0.0;
    double micro_aucpr = 0.0;
    Score overall_mcc;
    double mean_score = 0.0;

    nlohmann::json to_json() const;
};

MetricsReport evaluate(const Matrix& proba, std::span<const int> y_true,
                       const std::vector<std::string>& class_names);

// Field-wise mean over reports of the same classes. Confusion matrices are
// summed. Degenerate entries are left out of a metric's mean; the result is
// degenerate only if every report was.
MetricsReport average_reports(std::span<const MetricsReport> reports);

// `class,recall,precision` rows, one block per class with any positives.
std::string pr_curves_csv(const Matrix& proba, std::span<const int> y_true,
                          const std::vector<std::string>& class_names);

}  // namespace fluhost::eval
