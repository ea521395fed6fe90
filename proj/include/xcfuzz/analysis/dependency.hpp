#pragma once

#include <xcfuzz/analysis/cfg.hpp>
#include <xcfuzz/analysis/postdom.hpp>
#include <xcfuzz/vm/trace.hpp>
#include <xcfuzz/vm/world.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace xcfuzz::analysis
{
    enum class DepKind : std::uint8_t
    {
        Control,
        Data,
    };

    struct DepEdge
    {
        std::size_t from = 0; // the node depended upon
        DepKind kind = DepKind::Data;

        auto operator<=>(DepEdge const &) const = default;
    };

    /// Nodes are trace event indices (dynamic) or block ids (static).
    /// An edge from -> to means `to` depends on `from`.
    class DependencyGraph
    {
    public:
        DependencyGraph() = default;
        explicit DependencyGraph(std::size_t nodes)
            : preds_(nodes)
        {
        }

        std::size_t size() const
        {
            return preds_.size();
        }

        void add(std::size_t from, std::size_t to, DepKind kind);

        /// Direct dependencies of `node`, sorted and unique.
        std::vector<DepEdge> const &dependencies(std::size_t node) const
        {
            return preds_.at(node);
        }

        bool has_edge(std::size_t from, std::size_t to, std::optional<DepKind> kind = {}) const;

        std::size_t edge_count() const;

        /// All nodes `node` transitively depends on, restricted to edges of
        /// `kind` when given. `node` itself is included only through a cycle.
        std::vector<bool> closure(std::size_t node, std::optional<DepKind> kind = {}) const;

        bool depends_on(std::size_t node, std::size_t on) const
        {
            return closure(node)[on];
        }

        /// Union of two graphs over the same node set.
        void merge(DependencyGraph const &other);

    private:
        std::vector<std::vector<DepEdge>> preds_;
    };

    /// Static control dependency between the blocks of `cfg`: `to` is
    /// control-dependent on `from` when some successor of `from` is
    /// post-dominated by `to` and `to` does not strictly post-dominate
    /// `from`. Blocks with no exit path are never sources.
    DependencyGraph control_dependencies(Cfg const &cfg, PostDomTree const &pdom);

    /// Dynamic data dependency: edge i -> j iff i < j and
    /// writes(i) and reads(j) intersect.
    DependencyGraph data_dependencies(vm::ExecutionTrace const &trace);

    /// Dynamic control dependency: within a frame, an event depends on the
    /// most recent earlier JUMPI event of each block its own block is
    /// statically control-dependent on (per the CFG of the frame's entry).
    DependencyGraph dynamic_control_dependencies(
        vm::ExecutionTrace const &trace, std::span<vm::ContractPackage const> packages);

    /// Data plus dynamic control dependencies.
    DependencyGraph trace_dependencies(
        vm::ExecutionTrace const &trace, std::span<vm::ContractPackage const> packages);
}
