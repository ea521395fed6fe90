#include <xcfuzz/fuzzer/harness.hpp>

#include <xcfuzz/vm/assembler.hpp>

#include <fmt/format.h>

namespace xcfuzz::fuzzer
{
    vm::ContractPackage harness_package(HarnessConfig const &config)
    {
        std::string src = "fallback: JUMPDEST\n";
        if (config.reentry_limit > 0 && config.target) {
            auto const sel_words = config.selector ? 1 : 0;
            auto const n = config.args.size();
            src += fmt::format("PUSH {} / PUSH {} / SLOAD / LT\n", config.reentry_limit,
                               harness_depth_slot);
            src += "JUMPI @go\nSTOP\ngo: JUMPDEST\n";
            src += fmt::format("PUSH 1 / PUSH {0} / SLOAD / ADD / PUSH {0} / SSTORE\n",
                               harness_depth_slot);
            if (config.selector) {
                src += fmt::format("PUSH {} / PUSH 0 / MSTORE\n", *config.selector);
            }
            for (std::size_t i = 0; i < n; ++i) {
                src += fmt::format("PUSH {} / SLOAD / PUSH {} / MSTORE\n", harness_args_slot + i,
                                   8 * (sel_words + i));
            }
            // retSize retOff argsSize argsOff value addr gas
            src += fmt::format("PUSH 0 / PUSH 0 / PUSH {} / PUSH 0 / PUSH 0 / PUSH {} / PUSH 0\n",
                               8 * (sel_words + n), *config.target);
            src += "CALL / POP\n";
            src += fmt::format("PUSH 1 / PUSH {0} / SLOAD / SUB / PUSH {0} / SSTORE\n",
                               harness_depth_slot);
        }
        src += "STOP\n";

        vm::ContractPackage pkg;
        pkg.name = std::string(harness_name);
        pkg.address = config.address;
        pkg.code = vm::assemble(src);
        pkg.balance = config.balance;
        for (std::size_t i = 0; i < config.args.size(); ++i) {
            pkg.initial_storage[harness_args_slot + i] = config.args[i];
        }
        vm::FunctionDescriptor fallback;
        fallback.name = "fallback";
        fallback.is_fallback = true;
        pkg.functions.push_back(fallback);
        return pkg;
    }

    void install_harness(vm::WorldState &world, HarnessConfig const &config)
    {
        world.install(harness_package(config));
    }

    ReentryEvidence reentry_evidence(vm::ExecutionTrace const &trace, vm::Address attacker)
    {
        ReentryEvidence ev;
        std::vector<bool> reentered(trace.frames.size(), false);
        for (auto const &f : trace.frames) {
            for (auto p = f.parent; p; p = trace.frame(*p).parent) {
                auto const &anc = trace.frame(*p);
                if (anc.code_owner == f.code_owner && anc.function == f.function &&
                    f.code_owner != attacker) {
                    reentered[f.id] = true;
                    ev.reentered = true;
                    break;
                }
            }
        }
        for (auto const &t : trace.value_transfers) {
            if (t.to != attacker || !t.event) {
                continue;
            }
            std::optional<vm::FrameId> f = t.frame;
            while (f) {
                if (reentered[*f]) {
                    ev.gain += t.amount;
                    break;
                }
                f = trace.frame(*f).parent;
            }
        }
        return ev;
    }
}
