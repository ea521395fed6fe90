#pragma once

#include <xcfuzz/learner/feature_vector.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace xcfuzz::learner
{
    using Labels = std::vector<std::uint8_t>; // 1 = positive

    struct TreeParams
    {
        std::size_t max_depth = 8;
        std::size_t min_samples_split = 2;

        bool operator==(TreeParams const &) const = default;
    };

    struct TreeNode
    {
        // -1 marks a leaf.
        std::int32_t feature = -1;
        double threshold = 0.0; // go left when x[feature] <= threshold
        std::int32_t left = -1;
        std::int32_t right = -1;
        // Weighted fraction of positives that reached the node.
        double value = 0.0;

        bool leaf() const
        {
            return feature < 0;
        }

        bool operator==(TreeNode const &) const = default;
    };

    /// CART classifier with weighted Gini impurity. Node 0 is the root.
    struct DecisionTree
    {
        std::vector<TreeNode> nodes;
        // Class predicted by a leaf whose positive fraction is exactly 0.5:
        // the majority class of the training data.
        bool tie_positive = false;

        TreeNode const &leaf_for(std::span<double const> x) const;

        /// Positive fraction of the reached leaf.
        double score(std::span<double const> x) const
        {
            return leaf_for(x).value;
        }

        bool predict(std::span<double const> x) const;

        std::size_t depth() const;

        bool operator==(DecisionTree const &) const = default;
    };

    /// Throws std::invalid_argument on empty or mismatched inputs. Splits
    /// scan features in index order and thresholds in ascending order; the
    /// first strictly best split wins, so fitting is deterministic.
    DecisionTree fit_tree(std::span<FeatureVector const> x, Labels const &y,
                          std::vector<double> const &weights, TreeParams const &params);
}
