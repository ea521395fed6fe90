#pragma once

#include <xcfuzz/learner/ensemble.hpp>

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace xcfuzz::learner
{
    struct PRPoint
    {
        double threshold = 0.0;
        double precision = 0.0;
        double recall = 0.0;

        bool operator==(PRPoint const &) const = default;
    };

    struct Confusion
    {
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t tn = 0;
        std::size_t fn = 0;

        /// 1 when nothing is predicted positive.
        double precision() const;
        /// 1 when there are no positives.
        double recall() const;
    };

    /// Predicted positive when score >= threshold.
    Confusion confusion_at(std::span<double const> scores, Labels const &labels, double threshold);

    /// One point per distinct score, thresholds descending.
    std::vector<PRPoint> pr_curve(std::span<double const> scores, Labels const &labels);

    /// Best recall over thresholds whose precision is at least `precision`;
    /// 0 if none reaches it.
    double recall_at_precision(std::span<double const> scores, Labels const &labels,
                               double precision);

    /// |R_m ∩ R_t| / |R_t|; empty when R_t is empty.
    std::optional<double> coverage_rate(std::set<std::string> const &model_hits,
                                        std::set<std::string> const &tool_hits);

    using CoverageReport = std::map<std::string, std::optional<double>>;

    struct LabeledExample
    {
        std::string id;
        FeatureVector x;
        bool label = false;
    };

    struct Evaluation
    {
        std::vector<PRPoint> curve;
        Confusion at_threshold;
        // Ids of the model's true positives at its threshold (R_m).
        std::set<std::string> true_positives;
        CoverageReport coverage;
    };

    /// Throws std::invalid_argument on an empty test set.
    Evaluation evaluate(EnsembleModel const &model, std::span<LabeledExample const> test,
                        std::map<std::string, std::set<std::string>> const &tool_reports);
}
