#include <xcfuzz/analysis/cfg.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

namespace xcfuzz::analysis
{
    namespace
    {
        struct RawBlock
        {
            std::size_t first;
            std::size_t last;
        };

        // Where control goes when it reaches a pc.
        struct Destination
        {
            std::optional<std::size_t> raw; // raw block index
            std::optional<std::size_t> cut; // boundary pc
        };
    }

    Cfg Cfg::build(std::span<std::uint8_t const> code, std::size_t entry_pc,
                   CfgOptions const &options)
    {
        Cfg cfg;
        cfg.instructions_ = vm::disassemble(code);
        auto const &ins = cfg.instructions_;

        std::map<std::size_t, std::size_t> index_of;
        for (std::size_t i = 0; i < ins.size(); ++i) {
            index_of.emplace(ins[i].pc, i);
        }
        if (!ins.empty() || entry_pc != 0) {
            if (!index_of.contains(entry_pc)) {
                throw std::invalid_argument("entry pc is not an instruction boundary");
            }
        }

        std::set<std::size_t> leaders{entry_pc};
        if (!ins.empty()) {
            leaders.insert(ins.front().pc);
        }
        for (std::size_t i = 0; i < ins.size(); ++i) {
            if (ins[i].op == Opcode::JUMPDEST || options.boundaries.contains(ins[i].pc)) {
                leaders.insert(ins[i].pc);
            }
            if (vm::is_terminator(ins[i].op) && i + 1 < ins.size()) {
                leaders.insert(ins[i + 1].pc);
            }
        }

        std::vector<RawBlock> raw;
        std::map<std::size_t, std::size_t> raw_at; // leader pc -> raw index
        for (std::size_t i = 0; i < ins.size(); ++i) {
            if (leaders.contains(ins[i].pc)) {
                raw_at.emplace(ins[i].pc, raw.size());
                raw.push_back({i, i + 1});
            }
            else {
                raw.back().last = i + 1;
            }
        }

        auto destination = [&](std::size_t pc) -> Destination {
            if (pc != entry_pc && options.boundaries.contains(pc)) {
                return {std::nullopt, pc};
            }
            return {raw_at.at(pc), std::nullopt};
        };
        auto valid_target = [&](std::size_t pc) {
            auto const it = index_of.find(pc);
            return it != index_of.end() && ins[it->second].op == Opcode::JUMPDEST;
        };

        // Per raw block: successor destinations (empty raw+cut = exit).
        struct RawInfo
        {
            Terminator terminator = Terminator::FallThrough;
            std::optional<std::size_t> jump_target;
            bool dynamic_jump = false;
            std::optional<std::size_t> cut_target;
            std::vector<std::size_t> succ; // raw indices
            bool to_exit = false;
        };
        std::vector<RawInfo> info(raw.size());
        for (std::size_t r = 0; r < raw.size(); ++r) {
            auto &ri = info[r];
            auto const &last = ins[raw[r].last - 1];
            auto follow = [&](Destination d) {
                if (d.cut) {
                    ri.cut_target = d.cut;
                    ri.to_exit = true;
                }
                else {
                    ri.succ.push_back(*d.raw);
                }
            };
            auto fall_through = [&] {
                if (raw[r].last < ins.size()) {
                    follow(destination(ins[raw[r].last].pc));
                }
                else {
                    ri.to_exit = true;
                }
            };
            auto jump = [&] {
                std::optional<std::size_t> target;
                if (raw[r].last - raw[r].first >= 2) {
                    auto const &prev = ins[raw[r].last - 2];
                    if (vm::is_push(prev.op)) {
                        target = prev.immediate;
                    }
                }
                if (!target) {
                    ri.dynamic_jump = true;
                    ri.to_exit = true;
                }
                else if (!valid_target(*target)) {
                    // Reverts at run time.
                    ri.to_exit = true;
                }
                else {
                    ri.jump_target = target;
                    follow(destination(*target));
                }
            };

            if (vm::is_halting(last.op)) {
                ri.terminator = Terminator::Halt;
                ri.to_exit = true;
            }
            else if (last.op == Opcode::JUMP) {
                ri.terminator = Terminator::Jump;
                jump();
            }
            else if (last.op == Opcode::JUMPI) {
                ri.terminator = Terminator::JumpI;
                jump();
                fall_through();
            }
            else if (raw[r].last == ins.size()) {
                ri.terminator = Terminator::Halt;
                ri.to_exit = true;
            }
            else {
                ri.terminator = Terminator::FallThrough;
                fall_through();
            }
        }

        // Keep the blocks reachable from entry, renumbered in pc order.
        std::vector<bool> seen(raw.size(), false);
        if (!raw.empty()) {
            std::deque<std::size_t> work{raw_at.at(entry_pc)};
            seen[work.front()] = true;
            while (!work.empty()) {
                auto const r = work.front();
                work.pop_front();
                for (auto s : info[r].succ) {
                    if (!seen[s]) {
                        seen[s] = true;
                        work.push_back(s);
                    }
                }
            }
        }
        std::vector<std::size_t> id_of(raw.size(), 0);
        for (std::size_t r = 0; r < raw.size(); ++r) {
            if (!seen[r]) {
                continue;
            }
            id_of[r] = cfg.blocks_.size();
            BasicBlock blk;
            blk.id = cfg.blocks_.size();
            blk.leader = ins[raw[r].first].pc;
            blk.first = raw[r].first;
            blk.last = raw[r].last;
            blk.terminator = info[r].terminator;
            blk.jump_target = info[r].jump_target;
            blk.dynamic_jump = info[r].dynamic_jump;
            blk.cut_target = info[r].cut_target;
            cfg.blocks_.push_back(blk);
        }
        BasicBlock exit;
        exit.id = cfg.blocks_.size();
        exit.leader = code.size();
        exit.first = exit.last = ins.size();
        exit.terminator = Terminator::Exit;
        cfg.blocks_.push_back(exit);
        cfg.succ_.assign(cfg.blocks_.size(), {});
        cfg.pred_.assign(cfg.blocks_.size(), {});

        if (raw.empty()) {
            // Empty code: entry is the exit itself.
            cfg.entry_ = cfg.exit();
            return cfg;
        }
        cfg.entry_ = id_of[raw_at.at(entry_pc)];
        for (std::size_t r = 0; r < raw.size(); ++r) {
            if (!seen[r]) {
                continue;
            }
            for (auto s : info[r].succ) {
                cfg.add_edge(id_of[r], id_of[s]);
            }
            if (info[r].to_exit) {
                cfg.add_edge(id_of[r], cfg.exit());
            }
        }
        cfg.mark_no_exit();
        return cfg;
    }

    Cfg Cfg::from_graph(std::size_t n, std::vector<std::pair<BlockId, BlockId>> const &edges,
                        BlockId entry, std::vector<BlockId> const &exits)
    {
        if (entry >= n) {
            throw std::invalid_argument("entry out of range");
        }
        Cfg cfg;
        for (std::size_t i = 0; i <= n; ++i) {
            BasicBlock blk;
            blk.id = i;
            blk.leader = i;
            blk.terminator = i == n ? Terminator::Exit : Terminator::FallThrough;
            cfg.blocks_.push_back(blk);
        }
        cfg.succ_.assign(n + 1, {});
        cfg.pred_.assign(n + 1, {});
        cfg.entry_ = entry;
        for (auto [a, b] : edges) {
            if (a >= n || b >= n) {
                throw std::invalid_argument("edge endpoint out of range");
            }
            cfg.add_edge(a, b);
        }
        for (auto x : exits) {
            if (x >= n) {
                throw std::invalid_argument("exit node out of range");
            }
            cfg.add_edge(x, n);
        }
        cfg.mark_no_exit();
        return cfg;
    }

    void Cfg::add_edge(BlockId from, BlockId to)
    {
        auto &s = succ_[from];
        if (std::find(s.begin(), s.end(), to) != s.end()) {
            return;
        }
        s.push_back(to);
        pred_[to].push_back(from);
    }

    void Cfg::mark_no_exit()
    {
        std::vector<bool> reaches(blocks_.size(), false);
        std::deque<BlockId> work{exit()};
        reaches[exit()] = true;
        while (!work.empty()) {
            auto const b = work.front();
            work.pop_front();
            for (auto p : pred_[b]) {
                if (!reaches[p]) {
                    reaches[p] = true;
                    work.push_back(p);
                }
            }
        }
        for (auto &blk : blocks_) {
            blk.no_exit = !reaches[blk.id];
        }
    }

    std::optional<BlockId> Cfg::block_at(std::size_t pc) const
    {
        for (auto const &blk : blocks_) {
            if (blk.terminator != Terminator::Exit && blk.first < blk.last &&
                blk.leader == pc) {
                return blk.id;
            }
        }
        return std::nullopt;
    }

    std::optional<BlockId> Cfg::block_containing(std::size_t pc) const
    {
        for (auto const &blk : blocks_) {
            if (blk.first >= blk.last) {
                continue;
            }
            auto const &lo = instructions_[blk.first];
            auto const &hi = instructions_[blk.last - 1];
            if (pc >= lo.pc && pc <= hi.pc) {
                return blk.id;
            }
        }
        return std::nullopt;
    }

    std::vector<BlockId> Cfg::bfs_order() const
    {
        std::vector<BlockId> order;
        std::vector<bool> seen(blocks_.size(), false);
        std::deque<BlockId> work{entry_};
        seen[entry_] = true;
        while (!work.empty()) {
            auto const b = work.front();
            work.pop_front();
            order.push_back(b);
            for (auto s : succ_[b]) {
                if (!seen[s]) {
                    seen[s] = true;
                    work.push_back(s);
                }
            }
        }
        return order;
    }

    bool Cfg::has_no_exit_blocks() const
    {
        return std::any_of(blocks_.begin(), blocks_.end(),
                           [](BasicBlock const &b) { return b.no_exit; });
    }
}
