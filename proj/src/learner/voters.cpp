#include <xcfuzz/learner/voters.hpp>

#include <xcfuzz/analysis/absint.hpp>
#include <xcfuzz/analysis/function.hpp>

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace xcfuzz::learner
{
    using analysis::BlockId;
    using analysis::CallSite;
    using analysis::FunctionAnalysis;
    using vm::Opcode;
    namespace taint = analysis::taint;

    std::string_view to_string(VoterId v)
    {
        switch (v) {
        case VoterId::Strict:
            return "v1-strict";
        case VoterId::Taint:
            return "v2-taint";
        case VoterId::Syntactic:
            return "v3-syntactic";
        }
        return "unknown";
    }

    namespace
    {
        bool may_carry_value(CallSite const &site)
        {
            return site.op != Opcode::DELEGATECALL &&
                   !(site.value.constant && *site.value.constant == 0);
        }

        std::vector<bool> reachable_from(analysis::Cfg const &cfg, BlockId start)
        {
            std::vector<bool> seen(cfg.size(), false);
            std::deque<BlockId> work;
            for (auto s : cfg.successors(start)) {
                if (!seen[s]) {
                    seen[s] = true;
                    work.push_back(s);
                }
            }
            while (!work.empty()) {
                auto const b = work.front();
                work.pop_front();
                for (auto s : cfg.successors(b)) {
                    if (!seen[s]) {
                        seen[s] = true;
                        work.push_back(s);
                    }
                }
            }
            return seen;
        }

        bool store_after_call(FunctionAnalysis const &fa)
        {
            auto const &cfg = fa.cfg();
            for (auto const &site : fa.absint().call_sites()) {
                auto const b = cfg.block_containing(site.pc);
                if (!b) {
                    continue;
                }
                for (auto const &ins : cfg.instructions(*b)) {
                    if (ins.pc > site.pc && ins.op == Opcode::SSTORE) {
                        return true;
                    }
                }
                auto const later = reachable_from(cfg, *b);
                for (BlockId x = 0; x < cfg.size(); ++x) {
                    if (!later[x]) {
                        continue;
                    }
                    for (auto const &ins : cfg.instructions(x)) {
                        if (ins.op == Opcode::SSTORE) {
                            return true;
                        }
                    }
                }
            }
            return false;
        }

        bool origin_guards_transfer(FunctionAnalysis const &fa)
        {
            auto const &cfg = fa.cfg();
            std::vector<BlockId> guards;
            for (auto b : fa.conditional_blocks()) {
                auto const jumpi = cfg.instructions(b).back();
                auto const *state = fa.absint().before(jumpi.pc);
                if (state != nullptr && state->stack.size() >= 2 &&
                    (state->stack[state->stack.size() - 2].taint & taint::origin) != 0) {
                    guards.push_back(b);
                }
            }
            if (guards.empty()) {
                return false;
            }
            for (auto const &site : fa.absint().call_sites()) {
                auto const b = cfg.block_containing(site.pc);
                if (!b || !may_carry_value(site)) {
                    continue;
                }
                auto const deps = fa.control().closure(*b);
                if (std::any_of(guards.begin(), guards.end(),
                                [&](BlockId g) { return deps[g]; })) {
                    return true;
                }
            }
            return false;
        }

        std::vector<vm::Instruction> byte_range(vm::ContractPackage const &pkg,
                                                vm::FunctionDescriptor const &fn)
        {
            auto end = pkg.code.size();
            for (auto const &g : pkg.functions) {
                if (g.entry_pc > fn.entry_pc) {
                    end = std::min(end, g.entry_pc);
                }
            }
            std::vector<vm::Instruction> out;
            for (auto const &ins : vm::disassemble(pkg.code)) {
                if (ins.pc >= fn.entry_pc && ins.pc < end) {
                    out.push_back(ins);
                }
            }
            return out;
        }

        bool has_op(std::vector<vm::Instruction> const &range, Opcode op)
        {
            return std::any_of(range.begin(), range.end(),
                               [&](vm::Instruction const &i) { return i.op == op; });
        }
    }

    std::map<VoterId, CategoryFlags> run_voters(vm::ContractPackage const &pkg,
                                                vm::FunctionDescriptor const &fn)
    {
        FunctionAnalysis const fa(pkg, fn);
        auto const &sites = fa.absint().call_sites();
        auto any_site = [&](auto pred) { return std::any_of(sites.begin(), sites.end(), pred); };
        auto is_delegate = [](CallSite const &s) { return s.op == Opcode::DELEGATECALL; };

        std::map<VoterId, CategoryFlags> out;
        out[VoterId::Strict] = {
            {VulnCategory::Reentrancy, store_after_call(fa)},
            {VulnCategory::Delegatecall, any_site([&](CallSite const &s) {
                 return is_delegate(s) && (s.target.taint & taint::calldata) != 0;
             })},
            {VulnCategory::TxOrigin, origin_guards_transfer(fa)},
        };
        out[VoterId::Taint] = {
            {VulnCategory::Reentrancy, any_site([](CallSite const &s) {
                 return s.op != Opcode::DELEGATECALL && (s.value.taint & taint::storage) != 0;
             })},
            {VulnCategory::Delegatecall, any_site([&](CallSite const &s) {
                 return is_delegate(s) &&
                        ((s.target.taint | s.payload_taint) & taint::calldata) != 0;
             })},
            {VulnCategory::TxOrigin, any_site([](CallSite const &s) {
                 return ((s.target.taint | s.value.taint | s.payload_taint) & taint::origin) != 0;
             })},
        };
        auto const range = byte_range(pkg, fn);
        auto const any_call = std::any_of(range.begin(), range.end(), [](vm::Instruction const &i) {
            return vm::is_critical(i.op);
        });
        out[VoterId::Syntactic] = {
            {VulnCategory::Reentrancy, any_call && has_op(range, Opcode::SSTORE)},
            {VulnCategory::Delegatecall, has_op(range, Opcode::DELEGATECALL)},
            {VulnCategory::TxOrigin, has_op(range, Opcode::ORIGIN)},
        };
        return out;
    }

    bool majority_label(Votes const &votes, VulnCategory category)
    {
        auto const yes = static_cast<std::size_t>(
            std::count_if(votes.begin(), votes.end(), [](auto const &v) { return v.second; }));
        switch (category) {
        case VulnCategory::Reentrancy:
            return yes >= 2;
        case VulnCategory::TxOrigin:
        case VulnCategory::Delegatecall:
            return yes >= 1;
        }
        throw std::invalid_argument("unknown vulnerability category");
    }
}
