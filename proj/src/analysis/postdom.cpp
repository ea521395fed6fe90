#include <xcfuzz/analysis/postdom.hpp>

#include <limits>

namespace xcfuzz::analysis
{
    // Iterative dominator computation on the reverse graph, rooted at the
    // virtual exit, using reverse-postorder numbering.
    PostDomTree::PostDomTree(Cfg const &cfg)
        : ipdom_(cfg.size())
        , root_(cfg.exit())
    {
        auto const n = cfg.size();
        constexpr auto none = std::numeric_limits<std::size_t>::max();

        // Postorder of the reverse graph (edges followed via predecessors).
        std::vector<std::size_t> order;
        std::vector<std::size_t> po_num(n, none);
        std::vector<bool> visited(n, false);
        std::vector<std::pair<BlockId, std::size_t>> stack{{root_, 0}};
        visited[root_] = true;
        while (!stack.empty()) {
            auto &[b, next] = stack.back();
            auto const &preds = cfg.predecessors(b);
            if (next < preds.size()) {
                auto const p = preds[next++];
                if (!visited[p]) {
                    visited[p] = true;
                    stack.push_back({p, 0});
                }
                continue;
            }
            po_num[b] = order.size();
            order.push_back(b);
            stack.pop_back();
        }

        std::vector<std::size_t> idom(n, none);
        idom[root_] = root_;
        auto intersect = [&](std::size_t a, std::size_t b) {
            while (a != b) {
                while (po_num[a] < po_num[b]) {
                    a = idom[a];
                }
                while (po_num[b] < po_num[a]) {
                    b = idom[b];
                }
            }
            return a;
        };

        bool changed = true;
        while (changed) {
            changed = false;
            for (auto it = order.rbegin(); it != order.rend(); ++it) {
                auto const b = *it;
                if (b == root_) {
                    continue;
                }
                std::size_t candidate = none;
                // Reverse-graph predecessors are CFG successors.
                for (auto s : cfg.successors(b)) {
                    if (idom[s] == none) {
                        continue;
                    }
                    candidate = candidate == none ? s : intersect(s, candidate);
                }
                if (candidate != none && idom[b] != candidate) {
                    idom[b] = candidate;
                    changed = true;
                }
            }
        }

        for (std::size_t b = 0; b < n; ++b) {
            if (b != root_ && idom[b] != none) {
                ipdom_[b] = idom[b];
            }
        }
    }

    bool PostDomTree::postdominates(BlockId a, BlockId b) const
    {
        if (!in_tree(a) || !in_tree(b)) {
            return false;
        }
        for (std::optional<BlockId> cur = b; cur; cur = ipdom_[*cur]) {
            if (*cur == a) {
                return true;
            }
        }
        return false;
    }
}
