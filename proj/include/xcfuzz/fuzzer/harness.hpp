#pragma once

#include <xcfuzz/vm/trace.hpp>
#include <xcfuzz/vm/world.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace xcfuzz::fuzzer
{
    inline constexpr vm::Address default_attacker = 0xA77A;
    inline constexpr vm::Word default_attacker_balance = 1000;
    inline constexpr std::string_view harness_name = "Attacker";

    // Harness storage: slot 0 holds the current re-entry depth, slots
    // 1..n the argument words forwarded on re-entry.
    inline constexpr vm::Word harness_depth_slot = 0;
    inline constexpr vm::Word harness_args_slot = 1;

    struct HarnessConfig
    {
        vm::Address address = default_attacker;
        vm::Word balance = default_attacker_balance;
        // Nested re-entries allowed; 0 makes a passive receiver.
        std::size_t reentry_limit = 1;
        // Re-entry call; without a target the harness never calls out.
        std::optional<vm::Address> target;
        std::optional<vm::Selector> selector;
        std::vector<vm::Word> args;

        bool operator==(HarnessConfig const &) const = default;
    };

    /// The attacker contract: a fallback that, while the stored depth is
    /// below the limit, raises it, calls (target, selector, args) with no
    /// value, and lowers it again.
    vm::ContractPackage harness_package(HarnessConfig const &config);

    /// Installs the harness into `world`. Throws vm::DeployError if the
    /// address is taken.
    void install_harness(vm::WorldState &world, HarnessConfig const &config);

    struct ReentryEvidence
    {
        bool reentered = false; // some activation re-entered its own function
        vm::Word gain = 0;      // value sent to the attacker inside re-entered activations
    };

    /// An activation is re-entered when an ancestor frame runs the same
    /// function of the same code owner. Only committed transfers count.
    ReentryEvidence reentry_evidence(vm::ExecutionTrace const &trace, vm::Address attacker);
}
