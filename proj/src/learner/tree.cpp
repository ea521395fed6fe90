#include <xcfuzz/learner/tree.hpp>

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace xcfuzz::learner
{
    namespace
    {
        constexpr double min_gain = 1e-12;

        double gini(double pos, double total)
        {
            if (total <= 0.0) {
                return 0.0;
            }
            auto const p = pos / total;
            return 2.0 * p * (1.0 - p);
        }

        struct Builder
        {
            std::span<FeatureVector const> x;
            Labels const &y;
            std::vector<double> const &w;
            TreeParams const &params;
            DecisionTree tree;

            std::int32_t grow(std::vector<std::size_t> const &rows, std::size_t depth)
            {
                double total = 0.0;
                double pos = 0.0;
                for (auto r : rows) {
                    total += w[r];
                    pos += y[r] ? w[r] : 0.0;
                }
                auto const id = static_cast<std::int32_t>(tree.nodes.size());
                TreeNode node;
                node.value = total > 0.0 ? pos / total : (tree.tie_positive ? 1.0 : 0.0);
                tree.nodes.push_back(node);

                auto const impurity = gini(pos, total) * total;
                if (depth >= params.max_depth || rows.size() < params.min_samples_split ||
                    impurity <= min_gain) {
                    return id;
                }

                auto const dims = x[rows.front()].size();
                double best_cost = impurity - min_gain;
                std::int32_t best_feature = -1;
                double best_threshold = 0.0;
                std::vector<std::size_t> order(rows);
                for (std::size_t f = 0; f < dims; ++f) {
                    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                        return x[a][f] < x[b][f];
                    });
                    double left_total = 0.0;
                    double left_pos = 0.0;
                    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                        auto const r = order[i];
                        left_total += w[r];
                        left_pos += y[r] ? w[r] : 0.0;
                        auto const here = x[r][f];
                        auto const next = x[order[i + 1]][f];
                        if (!(here < next)) {
                            continue;
                        }
                        auto const cost = gini(left_pos, left_total) * left_total +
                                          gini(pos - left_pos, total - left_total) *
                                              (total - left_total);
                        if (cost < best_cost) {
                            best_cost = cost;
                            best_feature = static_cast<std::int32_t>(f);
                            best_threshold = here + (next - here) / 2.0;
                        }
                    }
                }
                if (best_feature < 0) {
                    return id;
                }

                std::vector<std::size_t> left_rows;
                std::vector<std::size_t> right_rows;
                for (auto r : rows) {
                    (x[r][static_cast<std::size_t>(best_feature)] <= best_threshold ? left_rows
                                                                                   : right_rows)
                        .push_back(r);
                }
                auto const l = grow(left_rows, depth + 1);
                auto const rt = grow(right_rows, depth + 1);
                auto &n = tree.nodes[static_cast<std::size_t>(id)];
                n.feature = best_feature;
                n.threshold = best_threshold;
                n.left = l;
                n.right = rt;
                return id;
            }
        };

        std::size_t depth_of(DecisionTree const &t, std::int32_t id)
        {
            auto const &n = t.nodes[static_cast<std::size_t>(id)];
            if (n.leaf()) {
                return 0;
            }
            return 1 + std::max(depth_of(t, n.left), depth_of(t, n.right));
        }
    }

    TreeNode const &DecisionTree::leaf_for(std::span<double const> x) const
    {
        if (nodes.empty()) {
            throw std::logic_error("empty decision tree");
        }
        auto const *n = &nodes.front();
        while (!n->leaf()) {
            auto const f = static_cast<std::size_t>(n->feature);
            if (f >= x.size()) {
                throw std::invalid_argument("feature vector too short for tree");
            }
            n = &nodes[static_cast<std::size_t>(x[f] <= n->threshold ? n->left : n->right)];
        }
        return *n;
    }

    bool DecisionTree::predict(std::span<double const> x) const
    {
        auto const v = score(x);
        if (v == 0.5) {
            return tie_positive;
        }
        return v > 0.5;
    }

    std::size_t DecisionTree::depth() const
    {
        return nodes.empty() ? 0 : depth_of(*this, 0);
    }

    DecisionTree fit_tree(std::span<FeatureVector const> x, Labels const &y,
                          std::vector<double> const &weights, TreeParams const &params)
    {
        if (x.empty() || x.size() != y.size() || x.size() != weights.size()) {
            throw std::invalid_argument("training data is empty or inconsistent");
        }
        for (auto const &row : x) {
            if (row.size() != x.front().size()) {
                throw std::invalid_argument("feature vectors differ in length");
            }
        }
        Builder b{x, y, weights, params, {}};
        double pos = 0.0;
        double total = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            total += weights[i];
            pos += y[i] ? weights[i] : 0.0;
        }
        b.tree.tie_positive = pos > total - pos;
        std::vector<std::size_t> rows(x.size());
        std::iota(rows.begin(), rows.end(), 0);
        b.grow(rows, 0);
        return std::move(b.tree);
    }
}
