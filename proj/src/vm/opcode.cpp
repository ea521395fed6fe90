#include <xcfuzz/vm/opcode.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace xcfuzz::vm
{
    namespace
    {
        using enum Opcode;

        constexpr std::array opcode_table{
            OpcodeInfo{STOP, "STOP", 0, 0, 0, 0},
            OpcodeInfo{ADD, "ADD", 0, 2, 2, 1},
            OpcodeInfo{MUL, "MUL", 0, 2, 2, 1},
            OpcodeInfo{SUB, "SUB", 0, 2, 2, 1},
            OpcodeInfo{DIV, "DIV", 0, 2, 2, 1},
            OpcodeInfo{LT, "LT", 0, 2, 2, 1},
            OpcodeInfo{GT, "GT", 0, 2, 2, 1},
            OpcodeInfo{EQ, "EQ", 0, 2, 2, 1},
            OpcodeInfo{ISZERO, "ISZERO", 0, 1, 1, 1},
            OpcodeInfo{AND, "AND", 0, 2, 2, 1},
            OpcodeInfo{OR, "OR", 0, 2, 2, 1},
            OpcodeInfo{NOT, "NOT", 0, 1, 1, 1},
            OpcodeInfo{BALANCE, "BALANCE", 0, 1, 1, 1},
            OpcodeInfo{ORIGIN, "ORIGIN", 0, 0, 0, 1},
            OpcodeInfo{CALLER, "CALLER", 0, 0, 0, 1},
            OpcodeInfo{CALLVALUE, "CALLVALUE", 0, 0, 0, 1},
            OpcodeInfo{CALLDATALOAD, "CALLDATALOAD", 0, 1, 1, 1},
            OpcodeInfo{CALLDATASIZE, "CALLDATASIZE", 0, 0, 0, 1},
            OpcodeInfo{POP, "POP", 0, 1, 1, 0},
            OpcodeInfo{MLOAD, "MLOAD", 0, 1, 1, 1},
            OpcodeInfo{MSTORE, "MSTORE", 0, 2, 2, 0},
            OpcodeInfo{SLOAD, "SLOAD", 0, 1, 1, 1},
            OpcodeInfo{SSTORE, "SSTORE", 0, 2, 2, 0},
            OpcodeInfo{JUMP, "JUMP", 0, 1, 1, 0},
            OpcodeInfo{JUMPI, "JUMPI", 0, 2, 2, 0},
            OpcodeInfo{JUMPDEST, "JUMPDEST", 0, 0, 0, 0},
            OpcodeInfo{PUSH1, "PUSH1", 1, 0, 0, 1},
            OpcodeInfo{PUSH2, "PUSH2", 2, 0, 0, 1},
            OpcodeInfo{PUSH3, "PUSH3", 3, 0, 0, 1},
            OpcodeInfo{PUSH4, "PUSH4", 4, 0, 0, 1},
            OpcodeInfo{PUSH5, "PUSH5", 5, 0, 0, 1},
            OpcodeInfo{PUSH6, "PUSH6", 6, 0, 0, 1},
            OpcodeInfo{PUSH7, "PUSH7", 7, 0, 0, 1},
            OpcodeInfo{PUSH8, "PUSH8", 8, 0, 0, 1},
            OpcodeInfo{DUP1, "DUP1", 0, 1, 1, 1},
            OpcodeInfo{DUP2, "DUP2", 0, 2, 1, 1},
            OpcodeInfo{DUP3, "DUP3", 0, 3, 1, 1},
            OpcodeInfo{DUP4, "DUP4", 0, 4, 1, 1},
            OpcodeInfo{SWAP1, "SWAP1", 0, 2, 2, 0},
            OpcodeInfo{SWAP2, "SWAP2", 0, 3, 2, 0},
            OpcodeInfo{SWAP3, "SWAP3", 0, 4, 2, 0},
            OpcodeInfo{SWAP4, "SWAP4", 0, 5, 2, 0},
            OpcodeInfo{CALL, "CALL", 0, 7, 7, 1},
            OpcodeInfo{CALLCODE, "CALLCODE", 0, 7, 7, 1},
            OpcodeInfo{RETURN, "RETURN", 0, 2, 2, 0},
            OpcodeInfo{DELEGATECALL, "DELEGATECALL", 0, 6, 6, 1},
            OpcodeInfo{REVERT, "REVERT", 0, 2, 2, 0},
        };

        consteval std::array<std::int16_t, 256> build_index()
        {
            std::array<std::int16_t, 256> index{};
            index.fill(-1);
            for (std::size_t i = 0; i < opcode_table.size(); ++i) {
                index[static_cast<std::uint8_t>(opcode_table[i].op)] =
                    static_cast<std::int16_t>(i);
            }
            return index;
        }

        constexpr auto byte_index = build_index();
    }

    std::span<OpcodeInfo const> all_opcodes()
    {
        return opcode_table;
    }

    std::optional<OpcodeInfo> lookup(std::uint8_t byte)
    {
        auto const i = byte_index[byte];
        if (i < 0) {
            return std::nullopt;
        }
        return opcode_table[static_cast<std::size_t>(i)];
    }

    std::optional<OpcodeInfo> lookup(std::string_view mnemonic)
    {
        for (auto const &entry : opcode_table) {
            if (entry.mnemonic.size() != mnemonic.size()) {
                continue;
            }
            bool same = true;
            for (std::size_t i = 0; i < mnemonic.size() && same; ++i) {
                same = std::toupper(static_cast<unsigned char>(mnemonic[i])) ==
                       entry.mnemonic[i];
            }
            if (same) {
                return entry;
            }
        }
        return std::nullopt;
    }

    OpcodeInfo const &info(Opcode op)
    {
        return opcode_table[static_cast<std::size_t>(
            byte_index[static_cast<std::uint8_t>(op)])];
    }

    std::string_view collapsed_mnemonic(Opcode op)
    {
        if (is_push(op)) {
            return "PUSH";
        }
        if (is_dup(op)) {
            return "DUP";
        }
        if (is_swap(op)) {
            return "SWAP";
        }
        return info(op).mnemonic;
    }

    std::vector<Instruction> disassemble(std::span<std::uint8_t const> code)
    {
        std::vector<Instruction> out;
        std::size_t pc = 0;
        while (pc < code.size()) {
            auto const entry = lookup(code[pc]);
            if (!entry) {
                throw DecodeError(
                    fmt::format(
                        "undecodable byte 0x{:02x} at pc {}", code[pc], pc),
                    pc);
            }
            if (pc + entry->immediate_bytes >= code.size() &&
                entry->immediate_bytes > 0) {
                throw DecodeError(
                    fmt::format(
                        "truncated immediate for {} at pc {}",
                        entry->mnemonic,
                        pc),
                    pc);
            }
            Word immediate = 0;
            for (std::size_t i = 1; i <= entry->immediate_bytes; ++i) {
                immediate = (immediate << 8) | code[pc + i];
            }
            out.push_back({pc, entry->op, immediate});
            pc += 1 + entry->immediate_bytes;
        }
        return out;
    }

    std::string to_text(std::span<Instruction const> instructions)
    {
        std::string out;
        for (auto const &ins : instructions) {
            auto const &entry = info(ins.op);
            if (entry.immediate_bytes > 0) {
                out += fmt::format(
                    "{} 0x{:0{}x}\n",
                    entry.mnemonic,
                    ins.immediate,
                    entry.immediate_bytes * 2);
            }
            else {
                out += fmt::format("{}\n", entry.mnemonic);
            }
        }
        return out;
    }

    std::string to_hex(std::span<std::uint8_t const> bytes)
    {
        std::string out;
        out.reserve(bytes.size() * 2);
        for (auto b : bytes) {
            out += fmt::format("{:02x}", b);
        }
        return out;
    }

    std::vector<std::uint8_t> from_hex(std::string_view hex)
    {
        std::string digits;
        for (auto c : hex) {
            if (!std::isspace(static_cast<unsigned char>(c))) {
                digits.push_back(c);
            }
        }
        std::string_view view = digits;
        if (view.starts_with("0x") || view.starts_with("0X")) {
            view.remove_prefix(2);
        }
        if (view.size() % 2 != 0) {
            throw std::invalid_argument("hex string has odd length");
        }
        auto nibble = [](char c) -> int {
            if (c >= '0' && c <= '9') {
                return c - '0';
            }
            if (c >= 'a' && c <= 'f') {
                return c - 'a' + 10;
            }
            if (c >= 'A' && c <= 'F') {
                return c - 'A' + 10;
            }
            throw std::invalid_argument(
                fmt::format("invalid hex digit '{}'", c));
        };
        std::vector<std::uint8_t> out;
        out.reserve(view.size() / 2);
        for (std::size_t i = 0; i < view.size(); i += 2) {
            out.push_back(static_cast<std::uint8_t>(
                (nibble(view[i]) << 4) | nibble(view[i + 1])));
        }
        return out;
    }

    std::string format_address(Address a)
    {
        return fmt::format("0x{:016x}", a);
    }

    std::string format_selector(Selector s)
    {
        return fmt::format("0x{:08x}", s);
    }
}
