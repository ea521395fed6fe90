#pragma once

#include <xcfuzz/analysis/cfg.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace xcfuzz::analysis
{
    using vm::Word;

    // Sources an abstract value may be derived from.
    namespace taint
    {
        inline constexpr std::uint8_t calldata = 1 << 0;
        inline constexpr std::uint8_t storage = 1 << 1;
        inline constexpr std::uint8_t origin = 1 << 2;
        inline constexpr std::uint8_t caller = 1 << 3;
        inline constexpr std::uint8_t callvalue = 1 << 4;
        inline constexpr std::uint8_t balance = 1 << 5;
        inline constexpr std::uint8_t call_result = 1 << 6;
    }

    /// Constant-or-unknown value carrying a taint set.
    struct AbsValue
    {
        std::optional<Word> constant;
        std::uint8_t taint = 0;

        static AbsValue of(Word w)
        {
            return {w, 0};
        }

        static AbsValue unknown(std::uint8_t t = 0)
        {
            return {std::nullopt, t};
        }

        bool operator==(AbsValue const &) const = default;
    };

    AbsValue join(AbsValue const &a, AbsValue const &b);

    /// Memory keyed by constant byte offset of an 8-byte word; `rest`
    /// describes every word not in the map.
    struct AbsMemory
    {
        std::map<Word, AbsValue> words;
        AbsValue rest = AbsValue::of(0);

        AbsValue load(Word offset) const;
        void store(Word offset, AbsValue const &v);
        void store_unknown(AbsValue const &v);
        /// Marks [offset, offset + size) as holding `v`.
        void clobber(Word offset, Word size, AbsValue const &v);
        /// Join of all taint that may be read from [offset, offset + size).
        std::uint8_t taint_of(Word offset, Word size) const;
        std::uint8_t taint_of_all() const;

        bool operator==(AbsMemory const &) const = default;
    };

    struct AbsState
    {
        std::vector<AbsValue> stack; // back() is the top
        AbsMemory memory;

        bool operator==(AbsState const &) const = default;
    };

    AbsState join(AbsState const &a, AbsState const &b);

    struct CallSite
    {
        std::size_t pc = 0;
        vm::Opcode op = vm::Opcode::CALL;
        AbsValue target;
        AbsValue value; // constant 0 for DELEGATECALL
        AbsValue args_offset;
        AbsValue args_size;
        // Constant first payload word when it fits a selector.
        std::optional<vm::Selector> selector;
        // The payload is statically known to hold no selector word.
        bool no_selector = false;
        std::uint8_t payload_taint = 0;
    };

    /// Flow-sensitive constant and taint propagation over a CFG, starting
    /// from an empty stack and zeroed memory at the entry.
    class AbstractInterpretation
    {
    public:
        explicit AbstractInterpretation(Cfg const &cfg);

        /// State before the instruction at `pc`; null if unreachable.
        AbsState const *before(std::size_t pc) const;

        std::vector<CallSite> const &call_sites() const
        {
            return call_sites_;
        }

    private:
        std::map<std::size_t, AbsState> before_;
        std::vector<CallSite> call_sites_;
    };

    /// Applies one instruction to `state`.
    void step(AbsState &state, vm::Instruction const &ins);
}
