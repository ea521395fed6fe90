#pragma once

#include <xcfuzz/oracles/detectors.hpp>
#include <xcfuzz/vm/world.hpp>

#include <array>
#include <map>
#include <string>
#include <string_view>

namespace xcfuzz::learner
{
    using oracles::VulnCategory;

    /// Built-in static detectors standing in for external tools. Their
    /// rule sets differ on purpose so that votes disagree.
    enum class VoterId : std::uint8_t
    {
        // Reentrancy: a call followed by an SSTORE on some CFG path.
        // Tx-origin: an ORIGIN-tainted branch guarding a value transfer.
        // Delegatecall: a DELEGATECALL target derived from call-data.
        Strict,
        // Reentrancy: a storage read feeding a call's value.
        // Tx-origin: ORIGIN taint in any call operand.
        // Delegatecall: call-data taint in a DELEGATECALL target or payload.
        Taint,
        // Presence checks over the function's byte range, dead code
        // included: a call opcode and an SSTORE; ORIGIN; DELEGATECALL.
        Syntactic,
    };

    inline constexpr std::array<VoterId, 3> all_voters{VoterId::Strict, VoterId::Taint,
                                                       VoterId::Syntactic};

    std::string_view to_string(VoterId v);

    using CategoryFlags = std::map<VulnCategory, bool>;

    std::map<VoterId, CategoryFlags> run_voters(vm::ContractPackage const &pkg,
                                                vm::FunctionDescriptor const &fn);

    /// voter id -> reported flag.
    using Votes = std::map<std::string, bool>;

    /// Reentrancy needs two yes votes, tx-origin one, delegatecall any
    /// report. Throws std::invalid_argument for a category outside the
    /// enumeration.
    bool majority_label(Votes const &votes, VulnCategory category);
}
