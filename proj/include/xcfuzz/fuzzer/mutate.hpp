#pragma once

#include <xcfuzz/learner/rng.hpp>
#include <xcfuzz/vm/world.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace xcfuzz::fuzzer
{
    using learner::Rng;

    inline constexpr vm::Word word_max = std::numeric_limits<vm::Word>::max();
    inline constexpr std::size_t max_dynamic_length = 8;

    /// One typed argument. Uint and Address use `scalar`; Array uses
    /// `elements`; Bytes uses `bytes`.
    struct ParamValue
    {
        vm::ParamKind kind = vm::ParamKind::Uint;
        vm::Word scalar = 0;
        std::vector<vm::Word> elements;
        std::vector<std::uint8_t> bytes;

        bool operator==(ParamValue const &) const = default;
    };

    /// Heads in parameter order, one word each; dynamic parameters hold the
    /// byte offset of their tail relative to the first argument word. A
    /// tail is a length word followed by the contents, bytes packed
    /// big-endian into words.
    std::vector<vm::Word> encode_args(std::vector<ParamValue> const &params);

    struct ArgPools
    {
        std::vector<vm::Word> uint_boundaries{0, 1, word_max, word_max - 1};
        // Deployed contracts followed by the attacker.
        std::vector<vm::Address> addresses;
        // {0, 1, attacker balance}
        std::vector<vm::Word> values;

        bool operator==(ArgPools const &) const = default;
    };

    ArgPools make_pools(std::vector<vm::ContractPackage> const &packages, vm::Address attacker,
                        vm::Word attacker_balance);

    struct CallInput
    {
        vm::Address target = 0;
        std::optional<vm::Selector> selector;
        std::vector<ParamValue> params;
        vm::Word value = 0;

        bool operator==(CallInput const &) const = default;
    };

    vm::TransactionRequest to_transaction(CallInput const &call, vm::Address sender,
                                          std::uint64_t step_budget);

    /// A uint drawn from the boundary set or at random (half of the random
    /// draws are small, below 256).
    vm::Word draw_uint(ArgPools const &pools, Rng &rng);

    ParamValue draw_param(vm::ParamKind kind, ArgPools const &pools, Rng &rng);

    /// Fresh arguments for `fn` at `target`, with value 0.
    CallInput initial_call(vm::Address target, vm::FunctionDescriptor const &fn,
                           ArgPools const &pools, Rng &rng);

    /// Changes exactly one field of `call`: one parameter (redrawn from its
    /// typed pool; dynamic ones get a length change or element/byte flips)
    /// or the value (another member of the value pool). A parameter that
    /// cannot change hands over to the value, so the result differs from
    /// the input whenever the value pool has two distinct members.
    CallInput mutate(CallInput const &call, ArgPools const &pools, Rng &rng);
}
