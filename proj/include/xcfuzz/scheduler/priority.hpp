#pragma once

#include <xcfuzz/analysis/callgraph.hpp>
#include <xcfuzz/analysis/features.hpp>
#include <xcfuzz/vm/world.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace xcfuzz::scheduler
{
    using analysis::CallGraph;
    using analysis::FunctionRef;
    using analysis::FunctionShape;

    inline constexpr std::size_t default_max_depth = 3;

    /// f_s * (S_C + 1) * (S_P + 1) with f_s = 0.5 when suspicious, else 1.
    double function_priority(FunctionShape const &shape, bool suspicious);

    /// (CondDis + 1) * (Comp + 1) of the calling function.
    std::uint64_t caller_priority(FunctionShape const &caller);

    /// Callers first, target last.
    using Chain = std::vector<FunctionRef>;

    /// "A.f -> B.g"
    std::string chain_string(Chain const &chain);

    struct PriorityScore
    {
        double f_s = 1.0;
        double s_func = 0.0;
        // Sum of caller_priority over every caller in the chain; 1 for a
        // direct entry.
        std::uint64_t s_caller = 1;

        bool operator==(PriorityScore const &) const = default;
    };

    struct PrioritizedPath
    {
        FunctionRef target;
        Chain chain;
        bool cross_contract = false; // some hop is an external edge
        PriorityScore scores;
        FunctionShape target_shape;
        std::vector<FunctionShape> caller_shapes; // chain order, target excluded

        bool direct_entry() const
        {
            return chain.size() == 1;
        }

        bool operator==(PrioritizedPath const &) const = default;
    };

    using WorkQueue = std::vector<PrioritizedPath>;

    /// Acyclic caller chains ending at `target` with at most `max_depth`
    /// functions, plus the one-element chain when `direct_entry` is set.
    /// Sorted by chain string. Throws std::invalid_argument for a target
    /// outside the graph or a zero depth.
    std::vector<Chain> enumerate_paths(CallGraph const &cg, FunctionRef const &target,
                                       std::size_t max_depth, bool direct_entry);

    /// One function with its score and candidate paths.
    struct ScoredFunction
    {
        FunctionRef ref;
        double s_func = 0.0;
        std::vector<PrioritizedPath> paths;
    };

    /// Functions by ascending S_func, then (contract, function); each
    /// function's paths by ascending S_caller, then chain string.
    WorkQueue prioritize(std::vector<ScoredFunction> functions);

    struct QueueOptions
    {
        std::size_t max_depth = default_max_depth;
    };

    /// Key: "Contract.function". Missing entries are not suspicious.
    using SuspicionMap = std::map<std::string, bool>;

    /// Scores every function of `packages` and returns the prioritized
    /// queue. Direct entries exist for public functions.
    WorkQueue build_queue(std::span<vm::ContractPackage const> packages, CallGraph const &cg,
                          SuspicionMap const &suspicious, QueueOptions const &options = {});
}
