#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace techtexc {

/// Classification scores over one evaluation set. Confusion matrix rows are
/// true classes, columns predicted classes; weighted aggregates use class
/// support (true-example count) as weights, so weighted recall equals
/// accuracy exactly.
struct Metrics {
    std::size_t num_classes = 0;
    std::size_t num_examples = 0;
    double accuracy = 0.0;

    std::vector<double> precision; // per class; 0 when undefined
    std::vector<double> recall;
    std::vector<double> f1;
    std::vector<std::size_t> support;

    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;

    std::vector<std::size_t> confusion; // row-major [C, C]

    std::size_t confusion_at(std::size_t true_class, std::size_t predicted) const {
        return confusion[true_class * num_classes + predicted];
    }
};

/// Per-class precision/recall/F1, their support-weighted aggregates,
/// accuracy and the confusion matrix. Undefined ratios (empty denominator)
/// count as 0 so aggregates are always defined.
/// Throws std::invalid_argument on length mismatch or out-of-range labels.
Metrics compute_metrics(std::span<const std::int32_t> y_true,
                        std::span<const std::int32_t> y_pred,
                        std::size_t num_classes);

/// Percentage with two decimals, rounded half away from zero on the value's
/// shortest decimal representation (so 0.82625 prints as "82.63").
std::string format_percent(double fraction);

/// Plain-text report: one key=value line per aggregate, a per-class table,
/// then the confusion matrix. `label_names`, when given, must have one entry
/// per class.
std::string format_report(const Metrics& m,
                          std::span<const std::string> label_names = {});

} // namespace techtexc
