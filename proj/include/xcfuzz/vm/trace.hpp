#pragma once

#include <xcfuzz/vm/opcode.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace xcfuzz::vm
{
    using ValueId = std::uint64_t;
    using FrameId = std::uint32_t;
    using EventIndex = std::size_t;

    enum class LocationKind : std::uint8_t
    {
        StorageSlot,
        MemoryWord,
        StackValue,
        EnvInput,
        CallReturn,
    };

    enum class EnvField : std::uint8_t
    {
        Calldata,
        Caller,
        Origin,
        CallValue,
    };

    /// A dataflow location. Field use per kind:
    ///   StorageSlot  a = account, b = slot
    ///   MemoryWord   a = frame, b = word index (byte offset / 8)
    ///   StackValue   a = value id
    ///   EnvInput     a = EnvField, b = frame (Origin is always frame 0)
    ///   CallReturn   a = index of the call event
    struct Location
    {
        LocationKind kind = LocationKind::StackValue;
        std::uint64_t a = 0;
        std::uint64_t b = 0;

        static Location storage(Address account, Word slot)
        {
            return {LocationKind::StorageSlot, account, slot};
        }

        static Location memory(FrameId frame, std::uint64_t word)
        {
            return {LocationKind::MemoryWord, frame, word};
        }

        static Location stack(ValueId id)
        {
            return {LocationKind::StackValue, id, 0};
        }

        static Location env(EnvField field, FrameId frame)
        {
            return {LocationKind::EnvInput, static_cast<std::uint64_t>(field), frame};
        }

        static Location call_return(EventIndex event)
        {
            return {LocationKind::CallReturn, event, 0};
        }

        // Only storage survives the end of a transaction.
        bool persistent() const
        {
            return kind == LocationKind::StorageSlot;
        }

        auto operator<=>(Location const &) const = default;
    };

    std::string to_string(Location const &loc);

    struct StackOperand
    {
        Word value = 0;
        ValueId id = 0;

        auto operator<=>(StackOperand const &) const = default;
    };

    struct TraceEvent
    {
        EventIndex index = 0;
        Opcode op = Opcode::STOP;
        std::size_t pc = 0;
        Address contract = 0; // code owner
        Address storage_context = 0;
        FrameId frame = 0;
        std::optional<Selector> selector; // empty: fallback activation
        std::vector<Location> reads;      // sorted, unique
        std::vector<Location> writes;     // sorted, unique
        std::vector<StackOperand> operands; // top of stack first

        bool operator==(TraceEvent const &) const = default;
    };

    enum class Outcome : std::uint8_t
    {
        Halted,
        Reverted,
        OutOfSteps,
    };

    std::string_view to_string(Outcome o);

    struct FrameRecord
    {
        FrameId id = 0;
        std::optional<FrameId> parent;
        Address code_owner = 0;
        Address storage_context = 0;
        Address caller = 0;
        Word value = 0;
        std::optional<Selector> selector;
        std::string function; // name of the dispatched function
        std::size_t entry_pc = 0;
        std::optional<EventIndex> call_event; // empty for the outermost frame
        std::uint32_t depth = 0;
        bool reverted = false;

        bool operator==(FrameRecord const &) const = default;
    };

    struct ValueTransfer
    {
        Address from = 0;
        Address to = 0;
        Word amount = 0;
        std::optional<EventIndex> event; // empty for the transaction value
        FrameId frame = 0;

        bool operator==(ValueTransfer const &) const = default;
    };

    struct ExecutionTrace
    {
        std::vector<TraceEvent> events;
        Outcome outcome = Outcome::Halted;
        std::set<Address> touched_contracts;
        // Committed transfers only; transfers undone by a revert are dropped.
        std::vector<ValueTransfer> value_transfers;
        std::vector<FrameRecord> frames;
        std::vector<std::uint8_t> return_data;
        std::uint64_t steps = 0;

        FrameRecord const &frame(FrameId id) const
        {
            return frames.at(id);
        }

        bool operator==(ExecutionTrace const &) const = default;
    };

    /// Stable text rendering; equal traces render to equal strings.
    std::string serialize(ExecutionTrace const &trace);
}
