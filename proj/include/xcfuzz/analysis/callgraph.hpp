#pragma once

#include <xcfuzz/vm/opcode.hpp>
#include <xcfuzz/vm/world.hpp>

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace xcfuzz::analysis
{
    struct FunctionRef
    {
        std::string contract;
        std::string function;

        std::string str() const
        {
            return contract + "." + function;
        }

        auto operator<=>(FunctionRef const &) const = default;
    };

    enum class EdgeKind : std::uint8_t
    {
        Internal, // caller and callee in the same contract
        External,
    };

    std::string_view to_string(EdgeKind kind);

    struct CallEdge
    {
        FunctionRef caller;
        FunctionRef callee;
        EdgeKind kind = EdgeKind::Internal;
        std::optional<std::size_t> pc; // empty for manifest-declared edges
        bool declared = false;
    };

    struct UnresolvedSite
    {
        FunctionRef caller;
        std::size_t pc = 0;
        vm::Opcode op = vm::Opcode::CALL;
    };

    class CallGraph
    {
    public:
        void add_node(FunctionRef const &f);

        /// Adds an edge unless one between the same pair exists. Both
        /// endpoints become nodes.
        void add_edge(CallEdge edge);

        void add_unresolved(UnresolvedSite site)
        {
            unresolved_.push_back(std::move(site));
        }

        std::set<FunctionRef> const &nodes() const
        {
            return nodes_;
        }

        std::vector<CallEdge> const &edges() const
        {
            return edges_;
        }

        std::vector<UnresolvedSite> const &unresolved() const
        {
            return unresolved_;
        }

        bool contains(FunctionRef const &f) const
        {
            return nodes_.contains(f);
        }

        /// Distinct direct callers, sorted.
        std::vector<FunctionRef> callers(FunctionRef const &f) const;
        std::vector<FunctionRef> callees(FunctionRef const &f) const;

        std::size_t in_degree(FunctionRef const &f) const
        {
            return callers(f).size();
        }

        CallEdge const *edge(FunctionRef const &caller, FunctionRef const &callee) const;

        bool has_external_callee(FunctionRef const &f) const;
        bool has_unresolved_site(FunctionRef const &f) const;

    private:
        std::set<FunctionRef> nodes_;
        std::vector<CallEdge> edges_;
        std::map<std::pair<FunctionRef, FunctionRef>, std::size_t> edge_index_;
        std::vector<UnresolvedSite> unresolved_;
    };

    /// Nodes are every (contract, function). Internal edges come from jumps
    /// into a sibling's entry; external edges from CALL-family sites with a
    /// constant target and selector (or a payload too short to hold one,
    /// which routes to the fallback) and from manifest-declared callees.
    /// Anything else is recorded as an unresolved site.
    CallGraph build_call_graph(std::span<vm::ContractPackage const> packages);
}
