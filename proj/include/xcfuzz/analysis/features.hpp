#pragma once

#include <xcfuzz/analysis/callgraph.hpp>
#include <xcfuzz/analysis/function.hpp>
#include <xcfuzz/vm/world.hpp>

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace xcfuzz::analysis
{
    /// The seven static flags, in this fixed order.
    struct StaticFeatures
    {
        bool has_modifier = false;
        bool has_call = false;
        bool has_delegate = false;
        bool has_tx_origin = false;
        bool has_balance = false;
        bool can_send_eth = false;
        bool callee_external = false;

        static constexpr std::size_t count = 7;
        static constexpr std::array<std::string_view, count> names{
            "has_modifier", "has_call",     "has_delegate",   "has_tx_origin",
            "has_balance",  "can_send_eth", "callee_external"};

        std::array<bool, count> as_array() const
        {
            return {has_modifier, has_call,     has_delegate,   has_tx_origin,
                    has_balance,  can_send_eth, callee_external};
        }

        bool operator==(StaticFeatures const &) const = default;
    };

    struct FunctionShape
    {
        std::size_t callers = 0;        // S_C
        std::size_t params = 0;         // S_P
        std::size_t complexity = 0;     // Comp
        std::size_t cond_distance = 0;  // CondDis

        bool operator==(FunctionShape const &) const = default;
    };

    /// 2 per address, bytes or array parameter, 1 per uint.
    std::size_t param_dimension(std::span<vm::ParamKind const> params);

    /// Entry-path CALLER/ORIGIN comparison whose failing side reverts.
    bool has_guard_prologue(FunctionAnalysis const &fa);

    /// Number of blocks on the shortest entry path strictly before the
    /// first conditional block; 0 when there is none.
    std::size_t condition_distance(Cfg const &cfg);

    /// Throws std::invalid_argument if `fn` is not a function of `pkg`.
    StaticFeatures extract_static_features(vm::ContractPackage const &pkg,
                                           vm::FunctionDescriptor const &fn,
                                           CallGraph const &cg);

    StaticFeatures extract_static_features(FunctionAnalysis const &fa, CallGraph const &cg);

    /// Throws std::invalid_argument if `fn` is not a function of `pkg`.
    FunctionShape function_shape(vm::ContractPackage const &pkg,
                                 vm::FunctionDescriptor const &fn, CallGraph const &cg);

    FunctionShape function_shape(FunctionAnalysis const &fa, CallGraph const &cg);
}
