// Binary detection metrics over a positive-class collapse, with the full
// multiclass confusion kept alongside. Undefined ratios (zero denominators)
// stay std::nullopt; they are never silently reported as 0.
#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

namespace gnnad {

struct ConfusionCounts {
    size_t tp = 0, fp = 0, tn = 0, fn = 0;

    size_t total() const { return tp + fp + tn + fn; }
};

struct RunMetrics {
    ConfusionCounts counts;
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::vector<std::vector<size_t>> per_class_confusion;  // truth x predicted
};

/// Positive = any class in `positive_classes`; an empty set means "any
/// nonzero label" (benign-vs-attack collapse).
inline RunMetrics compute_metrics(std::span<const int> predictions, std::span<const int> truth,
                                  const std::set<int>& positive_classes = {}) {
    if (predictions.size() != truth.size())
        throw std::invalid_argument("compute_metrics: length mismatch");
    auto is_positive = [&](int label) {
        return positive_classes.empty() ? label != 0 : positive_classes.count(label) > 0;
    };

    RunMetrics m;
    int max_class = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        max_class = std::max({max_class, truth[i], predictions[i]});
        const bool t = is_positive(truth[i]), p = is_positive(predictions[i]);
        if (t && p) ++m.counts.tp;
        else if (!t && p) ++m.counts.fp;
        else if (!t && !p) ++m.counts.tn;
        else ++m.counts.fn;
    }
    m.per_class_confusion.assign(static_cast<size_t>(max_class) + 1,
                                 std::vector<size_t>(static_cast<size_t>(max_class) + 1, 0));
    for (size_t i = 0; i < truth.size(); ++i)
        ++m.per_class_confusion[static_cast<size_t>(truth[i])][static_cast<size_t>(predictions[i])];

    const auto& c = m.counts;
    if (c.total() > 0)
        m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp > 0)
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0)
        m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0)
        m.f1 = 2.0 * (*m.recall * *m.precision) / (*m.recall + *m.precision);
    return m;
}

struct MetricsSummary {
    std::optional<double> accuracy, precision, recall, f1;
};

/// Arithmetic mean of each metric over the runs where it is defined.
inline MetricsSummary summarize(std::span<const RunMetrics> runs) {
    MetricsSummary s;
    auto mean_of = [&](auto getter) -> std::optional<double> {
        double sum = 0.0;
        size_t n = 0;
        for (const auto& r : runs)
            if (auto v = getter(r)) {
                sum += *v;
                ++n;
            }
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    };
    s.accuracy = mean_of([](const RunMetrics& r) { return r.accuracy; });
    s.precision = mean_of([](const RunMetrics& r) { return r.precision; });
    s.recall = mean_of([](const RunMetrics& r) { return r.recall; });
    s.f1 = mean_of([](const RunMetrics& r) { return r.f1; });
    return s;
}

}  // namespace gnnad
