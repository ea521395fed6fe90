#pragma once

#include <xcfuzz/vm/trace.hpp>
#include <xcfuzz/vm/world.hpp>

#include <cstddef>

namespace xcfuzz::vm
{
    inline constexpr std::size_t max_call_depth = 64;
    inline constexpr std::size_t max_stack_depth = 1024;
    inline constexpr std::size_t max_memory_bytes = 1 << 20;

    /// Runs one transaction against `world` and returns its full trace.
    ///
    /// Reverted and OutOfSteps outcomes roll back every storage write and
    /// balance change of the transaction; a reverted inner frame rolls back
    /// only its own effects and pushes 0 for the caller. DELEGATECALL runs
    /// callee code against the caller's storage with the caller's caller
    /// and value; CALLCODE runs it against the caller's storage with the
    /// caller as msg.sender.
    ///
    /// Throws std::invalid_argument if the target account does not exist,
    /// the step budget is zero, or the value exceeds the caller's balance.
    ExecutionTrace execute_transaction(WorldState &world, TransactionRequest const &tx);
}
