#pragma once

#include <xcfuzz/analysis/function.hpp>
#include <xcfuzz/vm/opcode.hpp>
#include <xcfuzz/vm/world.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace xcfuzz::learner
{
    /// Mnemonics of a function's reachable instructions in pc order, with
    /// PUSHk, DUPk and SWAPk collapsed to PUSH, DUP and SWAP.
    using TokenSequence = std::vector<std::string>;

    std::string_view token_of(vm::Opcode op);

    /// The collapsed vocabulary, sorted.
    std::vector<std::string> const &vocabulary();

    TokenSequence tokenize(analysis::FunctionAnalysis const &fa);
    TokenSequence tokenize(vm::ContractPackage const &pkg, vm::FunctionDescriptor const &fn);
}
