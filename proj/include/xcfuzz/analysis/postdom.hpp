#pragma once

#include <xcfuzz/analysis/cfg.hpp>

#include <optional>
#include <vector>

namespace xcfuzz::analysis
{
    /// Post-dominator tree rooted at the virtual exit.
    class PostDomTree
    {
    public:
        explicit PostDomTree(Cfg const &cfg);

        BlockId root() const
        {
            return root_;
        }

        /// Immediate post-dominator; empty for the root and for blocks
        /// from which the exit is unreachable.
        std::optional<BlockId> ipdom(BlockId b) const
        {
            return ipdom_.at(b);
        }

        /// True if the exit is reachable from `b` (so `b` is in the tree).
        bool in_tree(BlockId b) const
        {
            return b == root_ || ipdom_.at(b).has_value();
        }

        /// Reflexive: every tree node post-dominates itself.
        bool postdominates(BlockId a, BlockId b) const;

        std::size_t size() const
        {
            return ipdom_.size();
        }

    private:
        std::vector<std::optional<BlockId>> ipdom_;
        BlockId root_;
    };
}
