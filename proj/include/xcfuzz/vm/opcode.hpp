#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xcfuzz::vm
{
    using Word = std::uint64_t;
    using Address = std::uint64_t;
    using Selector = std::uint32_t;

    // Numbering follows the canonical EVM opcode table for the supported
    // subset. Anything not listed here is undecodable.
    enum class Opcode : std::uint8_t
    {
        STOP = 0x00,
        ADD = 0x01,
        MUL = 0x02,
        SUB = 0x03,
        DIV = 0x04,
        LT = 0x10,
        GT = 0x11,
        EQ = 0x14,
        ISZERO = 0x15,
        AND = 0x16,
        OR = 0x17,
        NOT = 0x19,
        BALANCE = 0x31,
        ORIGIN = 0x32,
        CALLER = 0x33,
        CALLVALUE = 0x34,
        CALLDATALOAD = 0x35,
        CALLDATASIZE = 0x36,
        POP = 0x50,
        MLOAD = 0x51,
        MSTORE = 0x52,
        SLOAD = 0x54,
        SSTORE = 0x55,
        JUMP = 0x56,
        JUMPI = 0x57,
        JUMPDEST = 0x5B,
        PUSH1 = 0x60,
        PUSH2 = 0x61,
        PUSH3 = 0x62,
        PUSH4 = 0x63,
        PUSH5 = 0x64,
        PUSH6 = 0x65,
        PUSH7 = 0x66,
        PUSH8 = 0x67,
        DUP1 = 0x80,
        DUP2 = 0x81,
        DUP3 = 0x82,
        DUP4 = 0x83,
        SWAP1 = 0x90,
        SWAP2 = 0x91,
        SWAP3 = 0x92,
        SWAP4 = 0x93,
        CALL = 0xF1,
        CALLCODE = 0xF2,
        RETURN = 0xF3,
        DELEGATECALL = 0xF4,
        REVERT = 0xFD,
    };

    struct OpcodeInfo
    {
        Opcode op;
        std::string_view mnemonic;
        std::uint8_t immediate_bytes;
        // Minimum stack depth the instruction needs.
        std::uint8_t min_depth;
        // Stack values recorded as operands of a trace event. Equal to
        // min_depth except for DUPn (reads one value) and SWAPn (two).
        std::uint8_t arity;
        std::uint8_t pushes;
    };

    /// Every supported opcode, ordered by numeric encoding.
    std::span<OpcodeInfo const> all_opcodes();

    std::optional<OpcodeInfo> lookup(std::uint8_t byte);
    std::optional<OpcodeInfo> lookup(std::string_view mnemonic);
    OpcodeInfo const &info(Opcode op);

    constexpr bool is_push(Opcode op)
    {
        return op >= Opcode::PUSH1 && op <= Opcode::PUSH8;
    }

    constexpr bool is_dup(Opcode op)
    {
        return op >= Opcode::DUP1 && op <= Opcode::DUP4;
    }

    constexpr bool is_swap(Opcode op)
    {
        return op >= Opcode::SWAP1 && op <= Opcode::SWAP4;
    }

    constexpr bool is_halting(Opcode op)
    {
        return op == Opcode::STOP || op == Opcode::RETURN ||
               op == Opcode::REVERT;
    }

    constexpr bool is_terminator(Opcode op)
    {
        return is_halting(op) || op == Opcode::JUMP || op == Opcode::JUMPI;
    }

    /// The critical opcode set: external calls that hand control to foreign
    /// code. Fixed at exactly CALL, CALLCODE and DELEGATECALL.
    inline constexpr std::array<Opcode, 3> critical_opcodes{
        Opcode::CALL, Opcode::CALLCODE, Opcode::DELEGATECALL};

    constexpr bool is_critical(Opcode op)
    {
        return op == Opcode::CALL || op == Opcode::CALLCODE ||
               op == Opcode::DELEGATECALL;
    }

    /// Mnemonic with PUSHk/DUPk/SWAPk collapsed to PUSH/DUP/SWAP.
    std::string_view collapsed_mnemonic(Opcode op);

    struct Instruction
    {
        std::size_t pc;
        Opcode op;
        Word immediate;

        std::size_t size() const
        {
            return 1 + info(op).immediate_bytes;
        }

        bool operator==(Instruction const &) const = default;
    };

    class DecodeError : public std::runtime_error
    {
    public:
        DecodeError(std::string const &what, std::size_t pc)
            : std::runtime_error(what)
            , pc_(pc)
        {
        }

        std::size_t pc() const
        {
            return pc_;
        }

    private:
        std::size_t pc_;
    };

    /// Decodes the whole byte stream. Throws DecodeError on an undecodable
    /// byte or a truncated immediate.
    std::vector<Instruction> disassemble(std::span<std::uint8_t const> code);

    /// One instruction per line, immediates in hex.
    std::string to_text(std::span<Instruction const> instructions);

    std::string to_hex(std::span<std::uint8_t const> bytes);
    std::vector<std::uint8_t> from_hex(std::string_view hex);

    std::string format_address(Address a);
    std::string format_selector(Selector s);
}
