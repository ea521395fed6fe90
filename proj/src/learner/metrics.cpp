#include <xcfuzz/learner/metrics.hpp>

#include <algorithm>
#include <stdexcept>

namespace xcfuzz::learner
{
    double Confusion::precision() const
    {
        return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    }

    double Confusion::recall() const
    {
        return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    }

    Confusion confusion_at(std::span<double const> scores, Labels const &labels, double threshold)
    {
        if (scores.size() != labels.size()) {
            throw std::invalid_argument("score and label counts differ");
        }
        Confusion c;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            bool const predicted = scores[i] >= threshold;
            bool const actual = labels[i] != 0;
            if (predicted && actual) {
                ++c.tp;
            }
            else if (predicted) {
                ++c.fp;
            }
            else if (actual) {
                ++c.fn;
            }
            else {
                ++c.tn;
            }
        }
        return c;
    }

    std::vector<PRPoint> pr_curve(std::span<double const> scores, Labels const &labels)
    {
        std::vector<double> thresholds(scores.begin(), scores.end());
        std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
        thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
        std::vector<PRPoint> out;
        for (auto t : thresholds) {
            auto const c = confusion_at(scores, labels, t);
            out.push_back({t, c.precision(), c.recall()});
        }
        return out;
    }

    double recall_at_precision(std::span<double const> scores, Labels const &labels,
                               double precision)
    {
        double best = 0.0;
        for (auto const &p : pr_curve(scores, labels)) {
            if (p.precision >= precision) {
                best = std::max(best, p.recall);
            }
        }
        return best;
    }

    std::optional<double> coverage_rate(std::set<std::string> const &model_hits,
                                        std::set<std::string> const &tool_hits)
    {
        if (tool_hits.empty()) {
            return std::nullopt;
        }
        std::size_t shared = 0;
        for (auto const &t : tool_hits) {
            shared += model_hits.contains(t) ? 1 : 0;
        }
        return static_cast<double>(shared) / static_cast<double>(tool_hits.size());
    }

    Evaluation evaluate(EnsembleModel const &model, std::span<LabeledExample const> test,
                        std::map<std::string, std::set<std::string>> const &tool_reports)
    {
        if (test.empty()) {
            throw std::invalid_argument("empty test set");
        }
        std::vector<double> scores;
        Labels labels;
        Evaluation ev;
        for (auto const &e : test) {
            auto const p = predict(model, e.x);
            scores.push_back(p.score);
            labels.push_back(e.label ? 1 : 0);
            if (p.suspicious && e.label) {
                ev.true_positives.insert(e.id);
            }
        }
        ev.curve = pr_curve(scores, labels);
        ev.at_threshold = confusion_at(scores, labels, model.params.threshold);
        for (auto const &[tool, hits] : tool_reports) {
            ev.coverage[tool] = coverage_rate(ev.true_positives, hits);
        }
        return ev;
    }
}
