#include <xcfuzz/analysis/features.hpp>

#include <fmt/format.h>

#include <deque>
#include <stdexcept>

namespace xcfuzz::analysis
{
    namespace
    {
        void require_member(vm::ContractPackage const &pkg, vm::FunctionDescriptor const &fn)
        {
            auto const *found = pkg.find_function(fn.name);
            if (found == nullptr || !(*found == fn)) {
                throw std::invalid_argument(
                    fmt::format("unknown function '{}' in contract '{}'", fn.name, pkg.name));
            }
        }

        bool reverts_immediately(Cfg const &cfg, BlockId b)
        {
            if (b == cfg.exit()) {
                return false;
            }
            auto const span = cfg.instructions(b);
            return !span.empty() && span.back().op == vm::Opcode::REVERT;
        }
    }

    std::size_t param_dimension(std::span<vm::ParamKind const> params)
    {
        std::size_t n = 0;
        for (auto p : params) {
            n += p == vm::ParamKind::Uint ? 1 : 2;
        }
        return n;
    }

    bool has_guard_prologue(FunctionAnalysis const &fa)
    {
        auto const &cfg = fa.cfg();
        // Follow the unconditional prefix from entry to the first branch.
        auto b = cfg.entry();
        std::vector<bool> seen(cfg.size(), false);
        while (b != cfg.exit() && !seen[b]) {
            seen[b] = true;
            auto const &blk = cfg.block(b);
            if (blk.terminator == Terminator::JumpI) {
                break;
            }
            auto const &succ = cfg.successors(b);
            if (succ.size() != 1) {
                return false;
            }
            b = succ.front();
        }
        if (b == cfg.exit() || cfg.block(b).terminator != Terminator::JumpI) {
            return false;
        }
        auto const jumpi = cfg.instructions(b).back();
        auto const *state = fa.absint().before(jumpi.pc);
        if (state == nullptr || state->stack.size() < 2) {
            return false;
        }
        auto const cond = state->stack[state->stack.size() - 2];
        if ((cond.taint & (taint::caller | taint::origin)) == 0) {
            return false;
        }
        for (auto s : cfg.successors(b)) {
            if (reverts_immediately(cfg, s)) {
                return true;
            }
        }
        return false;
    }

    std::size_t condition_distance(Cfg const &cfg)
    {
        std::vector<std::size_t> dist(cfg.size(), 0);
        std::vector<bool> seen(cfg.size(), false);
        std::deque<BlockId> work{cfg.entry()};
        seen[cfg.entry()] = true;
        while (!work.empty()) {
            auto const b = work.front();
            work.pop_front();
            if (cfg.block(b).terminator == Terminator::JumpI) {
                return dist[b];
            }
            for (auto s : cfg.successors(b)) {
                if (!seen[s]) {
                    seen[s] = true;
                    dist[s] = dist[b] + 1;
                    work.push_back(s);
                }
            }
        }
        return 0;
    }

    StaticFeatures extract_static_features(FunctionAnalysis const &fa, CallGraph const &cg)
    {
        StaticFeatures sf;
        FunctionRef const self{fa.package().name, fa.function().name};
        for (auto const &ins : fa.reachable_instructions()) {
            sf.has_call = sf.has_call || vm::is_critical(ins.op);
            sf.has_delegate = sf.has_delegate || ins.op == vm::Opcode::DELEGATECALL;
            sf.has_tx_origin = sf.has_tx_origin || ins.op == vm::Opcode::ORIGIN;
            sf.has_balance = sf.has_balance || ins.op == vm::Opcode::BALANCE;
        }
        for (auto const &site : fa.absint().call_sites()) {
            if (site.op == vm::Opcode::DELEGATECALL) {
                continue;
            }
            if (!site.value.constant || *site.value.constant != 0) {
                sf.can_send_eth = true;
            }
        }
        sf.has_modifier = fa.function().has_modifier || has_guard_prologue(fa);
        // A call site with a statically unknown target is counted as an
        // external callee of unknown identity.
        sf.callee_external = cg.has_external_callee(self) || cg.has_unresolved_site(self);
        return sf;
    }

    StaticFeatures extract_static_features(vm::ContractPackage const &pkg,
                                           vm::FunctionDescriptor const &fn,
                                           CallGraph const &cg)
    {
        require_member(pkg, fn);
        return extract_static_features(FunctionAnalysis(pkg, fn), cg);
    }

    FunctionShape function_shape(FunctionAnalysis const &fa, CallGraph const &cg)
    {
        FunctionShape shape;
        shape.callers = cg.in_degree({fa.package().name, fa.function().name});
        shape.params = param_dimension(fa.function().params);
        shape.complexity = fa.conditional_blocks().size();
        shape.cond_distance = condition_distance(fa.cfg());
        return shape;
    }

    FunctionShape function_shape(vm::ContractPackage const &pkg,
                                 vm::FunctionDescriptor const &fn, CallGraph const &cg)
    {
        require_member(pkg, fn);
        if (!cg.contains({pkg.name, fn.name})) {
            throw std::invalid_argument(
                fmt::format("function '{}.{}' is not in the call graph", pkg.name, fn.name));
        }
        return function_shape(FunctionAnalysis(pkg, fn), cg);
    }
}
