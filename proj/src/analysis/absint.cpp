#include <xcfuzz/analysis/absint.hpp>

#include <deque>

namespace xcfuzz::analysis
{
    using vm::Opcode;

    AbsValue join(AbsValue const &a, AbsValue const &b)
    {
        AbsValue out;
        out.taint = a.taint | b.taint;
        if (a.constant && b.constant && *a.constant == *b.constant) {
            out.constant = a.constant;
        }
        return out;
    }

    namespace
    {
        bool overlaps(Word a, Word b)
        {
            return (a > b ? a - b : b - a) < 8;
        }
    }

    AbsValue AbsMemory::load(Word offset) const
    {
        auto const exact = words.find(offset);
        std::optional<AbsValue> out;
        if (exact != words.end()) {
            out = exact->second;
        }
        auto const lo = offset >= 7 ? offset - 7 : 0;
        for (auto it = words.lower_bound(lo); it != words.end() && it->first <= offset + 7; ++it) {
            if (it->first == offset) {
                continue;
            }
            // Partial overlap: bytes of two stores mixed.
            auto const mixed = AbsValue::unknown(it->second.taint | rest.taint);
            out = out ? join(*out, mixed) : mixed;
        }
        return out ? *out : rest;
    }

    void AbsMemory::store(Word offset, AbsValue const &v)
    {
        auto const lo = offset >= 7 ? offset - 7 : 0;
        for (auto it = words.lower_bound(lo); it != words.end() && it->first <= offset + 7; ++it) {
            if (it->first != offset && overlaps(it->first, offset)) {
                it->second.constant.reset();
            }
        }
        words[offset] = v;
    }

    void AbsMemory::store_unknown(AbsValue const &v)
    {
        for (auto &[_, w] : words) {
            w = join(w, v);
        }
        rest = join(rest, v);
        rest.constant.reset();
    }

    void AbsMemory::clobber(Word offset, Word size, AbsValue const &v)
    {
        if (size == 0) {
            return;
        }
        auto const lo = offset >= 7 ? offset - 7 : 0;
        auto const hi = offset + size - 1;
        for (auto it = words.lower_bound(lo); it != words.end() && it->first <= hi; ++it) {
            it->second = v;
        }
        for (Word w = offset; w <= hi && w - offset < 4096; w += 8) {
            words[w] = v;
        }
    }

    std::uint8_t AbsMemory::taint_of(Word offset, Word size) const
    {
        if (size == 0) {
            return 0;
        }
        std::uint8_t t = 0;
        auto const lo = offset >= 7 ? offset - 7 : 0;
        auto const hi = offset + size - 1;
        bool covered = true;
        for (auto it = words.lower_bound(lo); it != words.end() && it->first <= hi; ++it) {
            t |= it->second.taint;
        }
        // Any byte not covered by a stored word reads from `rest`.
        for (Word w = offset; w <= hi; ++w) {
            auto it = words.upper_bound(w);
            if (it == words.begin()) {
                covered = false;
                break;
            }
            --it;
            if (w - it->first >= 8) {
                covered = false;
                break;
            }
            if (w - offset > 4096) {
                covered = false;
                break;
            }
        }
        if (!covered) {
            t |= rest.taint;
        }
        return t;
    }

    std::uint8_t AbsMemory::taint_of_all() const
    {
        std::uint8_t t = rest.taint;
        for (auto const &[_, w] : words) {
            t |= w.taint;
        }
        return t;
    }

    AbsState join(AbsState const &a, AbsState const &b)
    {
        AbsState out;
        auto const n = std::min(a.stack.size(), b.stack.size());
        out.stack.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.stack[n - 1 - i] =
                join(a.stack[a.stack.size() - 1 - i], b.stack[b.stack.size() - 1 - i]);
        }
        out.memory.rest = join(a.memory.rest, b.memory.rest);
        for (auto const &[k, v] : a.memory.words) {
            auto const it = b.memory.words.find(k);
            out.memory.words[k] = join(v, it == b.memory.words.end() ? b.memory.rest : it->second);
        }
        for (auto const &[k, v] : b.memory.words) {
            if (!a.memory.words.contains(k)) {
                out.memory.words[k] = join(v, a.memory.rest);
            }
        }
        return out;
    }

    void step(AbsState &state, vm::Instruction const &ins)
    {
        auto &stack = state.stack;
        auto pop = [&stack]() {
            if (stack.empty()) {
                return AbsValue::unknown();
            }
            auto const v = stack.back();
            stack.pop_back();
            return v;
        };
        auto push = [&stack](AbsValue v) { stack.push_back(v); };
        auto const op = ins.op;

        if (vm::is_push(op)) {
            push(AbsValue::of(ins.immediate));
            return;
        }
        if (vm::is_dup(op)) {
            auto const n = static_cast<std::size_t>(op) - static_cast<std::size_t>(Opcode::DUP1) + 1;
            push(stack.size() >= n ? stack[stack.size() - n] : AbsValue::unknown());
            return;
        }
        if (vm::is_swap(op)) {
            auto const n = static_cast<std::size_t>(op) - static_cast<std::size_t>(Opcode::SWAP1) + 1;
            while (stack.size() < n + 1) {
                stack.insert(stack.begin(), AbsValue::unknown());
            }
            std::swap(stack.back(), stack[stack.size() - 1 - n]);
            return;
        }

        switch (op) {
        case Opcode::ADD:
        case Opcode::MUL:
        case Opcode::SUB:
        case Opcode::DIV:
        case Opcode::LT:
        case Opcode::GT:
        case Opcode::EQ:
        case Opcode::AND:
        case Opcode::OR: {
            auto const a = pop();
            auto const b = pop();
            AbsValue r = AbsValue::unknown(a.taint | b.taint);
            if (a.constant && b.constant) {
                auto const x = *a.constant;
                auto const y = *b.constant;
                switch (op) {
                case Opcode::ADD:
                    r.constant = x + y;
                    break;
                case Opcode::MUL:
                    r.constant = x * y;
                    break;
                case Opcode::SUB:
                    r.constant = x - y;
                    break;
                case Opcode::DIV:
                    r.constant = y == 0 ? 0 : x / y;
                    break;
                case Opcode::LT:
                    r.constant = x < y ? 1 : 0;
                    break;
                case Opcode::GT:
                    r.constant = x > y ? 1 : 0;
                    break;
                case Opcode::EQ:
                    r.constant = x == y ? 1 : 0;
                    break;
                case Opcode::AND:
                    r.constant = x & y;
                    break;
                default:
                    r.constant = x | y;
                    break;
                }
            }
            push(r);
            return;
        }
        case Opcode::ISZERO:
        case Opcode::NOT: {
            auto a = pop();
            if (a.constant) {
                a.constant = op == Opcode::NOT ? ~*a.constant : (*a.constant == 0 ? 1 : 0);
            }
            push(a);
            return;
        }
        case Opcode::BALANCE:
            push(AbsValue::unknown(pop().taint | taint::balance));
            return;
        case Opcode::ORIGIN:
            push(AbsValue::unknown(taint::origin));
            return;
        case Opcode::CALLER:
            push(AbsValue::unknown(taint::caller));
            return;
        case Opcode::CALLVALUE:
            push(AbsValue::unknown(taint::callvalue));
            return;
        case Opcode::CALLDATALOAD:
            push(AbsValue::unknown(pop().taint | taint::calldata));
            return;
        case Opcode::CALLDATASIZE:
            push(AbsValue::unknown(taint::calldata));
            return;
        case Opcode::POP:
            pop();
            return;
        case Opcode::MLOAD: {
            auto const off = pop();
            if (off.constant) {
                push(state.memory.load(*off.constant));
            }
            else {
                push(AbsValue::unknown(state.memory.taint_of_all() | off.taint));
            }
            return;
        }
        case Opcode::MSTORE: {
            auto const off = pop();
            auto const val = pop();
            if (off.constant) {
                state.memory.store(*off.constant, val);
            }
            else {
                state.memory.store_unknown(val);
            }
            return;
        }
        case Opcode::SLOAD:
            pop();
            push(AbsValue::unknown(taint::storage));
            return;
        case Opcode::SSTORE:
            pop();
            pop();
            return;
        case Opcode::JUMP:
            pop();
            return;
        case Opcode::JUMPI:
            pop();
            pop();
            return;
        case Opcode::CALL:
        case Opcode::CALLCODE:
        case Opcode::DELEGATECALL: {
            pop();
            pop();
            if (op != Opcode::DELEGATECALL) {
                pop();
            }
            pop();
            pop();
            auto const ret_off = pop();
            auto const ret_size = pop();
            auto const result = AbsValue::unknown(taint::call_result);
            if (ret_off.constant && ret_size.constant) {
                state.memory.clobber(*ret_off.constant, *ret_size.constant, result);
            }
            else {
                state.memory.store_unknown(result);
            }
            push(result);
            return;
        }
        case Opcode::RETURN:
        case Opcode::REVERT:
            pop();
            pop();
            return;
        default:
            return;
        }
    }

    AbstractInterpretation::AbstractInterpretation(Cfg const &cfg)
    {
        std::vector<std::optional<AbsState>> in(cfg.size());
        if (cfg.entry() == cfg.exit()) {
            return;
        }
        in[cfg.entry()] = AbsState{};
        std::deque<BlockId> work{cfg.entry()};
        std::vector<bool> queued(cfg.size(), false);
        queued[cfg.entry()] = true;
        // Joins only lose constants or add taint, so this terminates; the
        // cap guards against pathological stack-height oscillation.
        std::size_t budget = 200 * cfg.size() + 1000;
        while (!work.empty() && budget-- > 0) {
            auto const b = work.front();
            work.pop_front();
            queued[b] = false;
            auto state = *in[b];
            for (auto const &ins : cfg.instructions(b)) {
                step(state, ins);
            }
            for (auto s : cfg.successors(b)) {
                if (s == cfg.exit()) {
                    continue;
                }
                auto next = in[s] ? join(*in[s], state) : state;
                if (!in[s] || next != *in[s]) {
                    in[s] = std::move(next);
                    if (!queued[s]) {
                        queued[s] = true;
                        work.push_back(s);
                    }
                }
            }
        }

        for (BlockId b = 0; b < cfg.size(); ++b) {
            if (!in[b]) {
                continue;
            }
            auto state = *in[b];
            for (auto const &ins : cfg.instructions(b)) {
                before_[ins.pc] = state;
                if (vm::is_critical(ins.op)) {
                    auto peek = [&state](std::size_t depth) {
                        return depth < state.stack.size()
                                   ? state.stack[state.stack.size() - 1 - depth]
                                   : AbsValue::unknown();
                    };
                    CallSite site;
                    site.pc = ins.pc;
                    site.op = ins.op;
                    site.target = peek(1);
                    std::size_t next = 2;
                    if (ins.op == Opcode::DELEGATECALL) {
                        site.value = AbsValue::of(0);
                    }
                    else {
                        site.value = peek(next++);
                    }
                    site.args_offset = peek(next++);
                    site.args_size = peek(next++);
                    if (site.args_offset.constant && site.args_size.constant) {
                        auto const off = *site.args_offset.constant;
                        auto const size = *site.args_size.constant;
                        site.payload_taint = state.memory.taint_of(off, size);
                        if (size < 8) {
                            site.no_selector = true;
                        }
                        else {
                            auto const word = state.memory.load(off);
                            if (word.constant && *word.constant <= 0xFFFFFFFFull) {
                                site.selector = static_cast<vm::Selector>(*word.constant);
                            }
                        }
                    }
                    else {
                        site.payload_taint = state.memory.taint_of_all() |
                                             site.args_offset.taint | site.args_size.taint;
                    }
                    call_sites_.push_back(site);
                }
                step(state, ins);
            }
        }
    }

    AbsState const *AbstractInterpretation::before(std::size_t pc) const
    {
        auto const it = before_.find(pc);
        return it == before_.end() ? nullptr : &it->second;
    }
}
