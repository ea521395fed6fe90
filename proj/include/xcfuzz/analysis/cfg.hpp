#pragma once

#include <xcfuzz/vm/opcode.hpp>

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace xcfuzz::analysis
{
    using vm::Instruction;
    using vm::Opcode;

    using BlockId = std::size_t;

    enum class Terminator : std::uint8_t
    {
        FallThrough,
        Jump,
        JumpI,
        Halt,  // STOP, RETURN, REVERT or running off the end of the code
        Exit,  // the virtual exit node
    };

    struct BasicBlock
    {
        BlockId id = 0;
        std::size_t leader = 0; // pc of the first instruction
        // Index range [first, last) into Cfg::instructions().
        std::size_t first = 0;
        std::size_t last = 0;
        Terminator terminator = Terminator::FallThrough;
        // Statically resolved JUMP/JUMPI destination, if any.
        std::optional<std::size_t> jump_target;
        bool dynamic_jump = false;
        // Control leaves the function here: a jump or fall-through into
        // another function's entry. The destination pc is `cut_target`.
        std::optional<std::size_t> cut_target;
        // Reachable from entry but no path reaches the virtual exit.
        bool no_exit = false;
    };

    struct CfgOptions
    {
        // Entry pcs of sibling functions; control reaching one of them
        // (other than the CFG's own entry) ends the function.
        std::set<std::size_t> boundaries;
    };

    /// Basic-block graph of the code reachable from one entry point.
    /// Blocks are numbered in pc order; the virtual exit is always the
    /// last id and carries no instructions.
    class Cfg
    {
    public:
        /// Throws vm::DecodeError on an undecodable byte or truncated
        /// immediate, std::invalid_argument if entry_pc is not an
        /// instruction boundary.
        static Cfg build(std::span<std::uint8_t const> code, std::size_t entry_pc,
                         CfgOptions const &options = {});

        /// Abstract graph over `n` nodes plus a virtual exit; nodes listed
        /// in `exits` get an edge to it. Intended for tests.
        static Cfg from_graph(std::size_t n,
                              std::vector<std::pair<BlockId, BlockId>> const &edges,
                              BlockId entry, std::vector<BlockId> const &exits);

        std::size_t size() const
        {
            return blocks_.size();
        }

        BlockId entry() const
        {
            return entry_;
        }

        BlockId exit() const
        {
            return blocks_.size() - 1;
        }

        std::vector<BasicBlock> const &blocks() const
        {
            return blocks_;
        }

        BasicBlock const &block(BlockId b) const
        {
            return blocks_.at(b);
        }

        std::vector<Instruction> const &instructions() const
        {
            return instructions_;
        }

        std::span<Instruction const> instructions(BlockId b) const
        {
            auto const &blk = blocks_.at(b);
            return std::span<Instruction const>(instructions_).subspan(
                blk.first, blk.last - blk.first);
        }

        std::vector<BlockId> const &successors(BlockId b) const
        {
            return succ_.at(b);
        }

        std::vector<BlockId> const &predecessors(BlockId b) const
        {
            return pred_.at(b);
        }

        std::optional<BlockId> block_at(std::size_t pc) const;

        /// The block owning the instruction at `pc`, if any.
        std::optional<BlockId> block_containing(std::size_t pc) const;

        /// Blocks in breadth-first order from entry.
        std::vector<BlockId> bfs_order() const;

        bool has_no_exit_blocks() const;

    private:
        void add_edge(BlockId from, BlockId to);
        void mark_no_exit();

        std::vector<Instruction> instructions_;
        std::vector<BasicBlock> blocks_;
        std::vector<std::vector<BlockId>> succ_;
        std::vector<std::vector<BlockId>> pred_;
        BlockId entry_ = 0;
    };
}
