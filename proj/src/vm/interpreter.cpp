#include <xcfuzz/vm/interpreter.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <stdexcept>

namespace xcfuzz::vm
{
    namespace
    {
        struct StackEntry
        {
            Word value;
            ValueId id;
        };

        struct JournalEntry
        {
            enum class Kind : std::uint8_t
            {
                Storage,
                Balance,
            };

            Kind kind;
            Address account;
            Word slot;
            std::optional<Word> previous;
        };

        enum class Status : std::uint8_t
        {
            Halted,
            Reverted,
            OutOfSteps,
        };

        struct FrameResult
        {
            Status status;
            std::vector<std::uint8_t> output;
        };

        struct Frame
        {
            FrameId id;
            Address code_owner;
            Address storage_context;
            Address caller;
            Word value;
            std::vector<std::uint8_t> calldata;
            ContractPackage const *package;
            std::optional<Selector> selector;
            std::size_t entry_pc;
            std::uint32_t depth;

            std::vector<StackEntry> stack;
            std::vector<std::uint8_t> memory;
        };

        std::optional<Selector> selector_from_calldata(std::vector<std::uint8_t> const &data)
        {
            if (data.size() < 8) {
                return std::nullopt;
            }
            Word w = 0;
            for (std::size_t i = 0; i < 8; ++i) {
                w = (w << 8) | data[i];
            }
            if (w > 0xFFFFFFFFull) {
                return std::nullopt;
            }
            return static_cast<Selector>(w);
        }

        void add_words(std::vector<Location> &out, FrameId frame, Word offset, Word size)
        {
            if (size == 0) {
                return;
            }
            for (Word w = offset / 8; w <= (offset + size - 1) / 8; ++w) {
                out.push_back(Location::memory(frame, w));
            }
        }

        void normalize(std::vector<Location> &locs)
        {
            std::sort(locs.begin(), locs.end());
            locs.erase(std::unique(locs.begin(), locs.end()), locs.end());
        }
    }

    class Interpreter
    {
    public:
        Interpreter(WorldState &world, TransactionRequest const &tx)
            : world_(world)
            , tx_(tx)
        {
        }

        ExecutionTrace run();

    private:
        FrameResult run_frame(Frame &frame);
        FrameResult execute_call(Frame &frame, Opcode op, std::size_t pc);

        bool ensure_memory(Frame &frame, Word offset, Word size);
        Word read_memory_word(Frame const &frame, Word offset) const;
        void write_memory_word(Frame &frame, Word offset, Word value);

        void set_storage(Address account, Word slot, Word value);
        void set_balance(Address account, Word value);
        bool transfer(Address from, Address to, Word amount, std::optional<EventIndex> event,
                      FrameId frame);
        void rollback(std::size_t journal_mark, std::size_t transfer_mark);

        std::vector<bool> const &jumpdests(ContractPackage const *pkg);

        TraceEvent &begin_event(Frame const &frame, Opcode op, std::size_t pc);
        ValueId fresh_value()
        {
            return next_value_++;
        }

        WorldState &world_;
        TransactionRequest const &tx_;
        ExecutionTrace trace_;
        std::vector<JournalEntry> journal_;
        std::map<ContractPackage const *, std::vector<bool>> jumpdest_cache_;
        ValueId next_value_ = 1;
    };

    std::vector<bool> const &Interpreter::jumpdests(ContractPackage const *pkg)
    {
        auto it = jumpdest_cache_.find(pkg);
        if (it != jumpdest_cache_.end()) {
            return it->second;
        }
        std::vector<bool> marks(pkg->code.size(), false);
        for (auto const &ins : disassemble(pkg->code)) {
            if (ins.op == Opcode::JUMPDEST) {
                marks[ins.pc] = true;
            }
        }
        return jumpdest_cache_.emplace(pkg, std::move(marks)).first->second;
    }

    bool Interpreter::ensure_memory(Frame &frame, Word offset, Word size)
    {
        if (size == 0) {
            return true;
        }
        if (offset > max_memory_bytes || size > max_memory_bytes ||
            offset + size > max_memory_bytes) {
            return false;
        }
        auto const needed = static_cast<std::size_t>((offset + size + 7) / 8 * 8);
        if (frame.memory.size() < needed) {
            frame.memory.resize(needed, 0);
        }
        return true;
    }

    Word Interpreter::read_memory_word(Frame const &frame, Word offset) const
    {
        Word w = 0;
        for (std::size_t i = 0; i < 8; ++i) {
            w = (w << 8) | frame.memory[offset + i];
        }
        return w;
    }

    void Interpreter::write_memory_word(Frame &frame, Word offset, Word value)
    {
        for (std::size_t i = 0; i < 8; ++i) {
            frame.memory[offset + i] =
                static_cast<std::uint8_t>((value >> (8 * (7 - i))) & 0xFF);
        }
    }

    void Interpreter::set_storage(Address account, Word slot, Word value)
    {
        auto &storage = world_.find(account)->storage;
        auto const it = storage.find(slot);
        journal_.push_back(
            {JournalEntry::Kind::Storage, account, slot,
             it == storage.end() ? std::nullopt : std::optional<Word>(it->second)});
        storage[slot] = value;
    }

    void Interpreter::set_balance(Address account, Word value)
    {
        auto *acct = world_.find(account);
        journal_.push_back({JournalEntry::Kind::Balance, account, 0, acct->balance});
        acct->balance = value;
    }

    bool Interpreter::transfer(Address from, Address to, Word amount,
                               std::optional<EventIndex> event, FrameId frame)
    {
        if (amount == 0) {
            return true;
        }
        auto *src = world_.find(from);
        auto *dst = world_.find(to);
        if (src == nullptr || dst == nullptr || src->balance < amount) {
            return false;
        }
        if (from != to) {
            set_balance(from, src->balance - amount);
            set_balance(to, dst->balance + amount);
        }
        trace_.value_transfers.push_back({from, to, amount, event, frame});
        return true;
    }

    void Interpreter::rollback(std::size_t journal_mark, std::size_t transfer_mark)
    {
        while (journal_.size() > journal_mark) {
            auto const entry = journal_.back();
            journal_.pop_back();
            auto *acct = world_.find(entry.account);
            if (entry.kind == JournalEntry::Kind::Balance) {
                acct->balance = *entry.previous;
            }
            else if (entry.previous) {
                acct->storage[entry.slot] = *entry.previous;
            }
            else {
                acct->storage.erase(entry.slot);
            }
        }
        trace_.value_transfers.resize(transfer_mark);
    }

    TraceEvent &Interpreter::begin_event(Frame const &frame, Opcode op, std::size_t pc)
    {
        TraceEvent event;
        event.index = trace_.events.size();
        event.op = op;
        event.pc = pc;
        event.contract = frame.code_owner;
        event.storage_context = frame.storage_context;
        event.frame = frame.id;
        event.selector = frame.selector;
        trace_.events.push_back(std::move(event));
        return trace_.events.back();
    }

    ExecutionTrace Interpreter::run()
    {
        if (tx_.step_budget == 0) {
            throw std::invalid_argument("step budget must be positive");
        }
        if (world_.find(tx_.target) == nullptr) {
            throw std::invalid_argument(
                fmt::format("unknown target {}", format_address(tx_.target)));
        }
        if (tx_.value > world_.balance(tx_.caller)) {
            throw std::invalid_argument(fmt::format(
                "value {} exceeds caller balance {}", tx_.value, world_.balance(tx_.caller)));
        }

        auto const route = world_.route(tx_.target, tx_.selector);
        if (route.kind == Route::Kind::Unmatched) {
            trace_.outcome = Outcome::Reverted;
            return std::move(trace_);
        }
        if (!transfer(tx_.caller, tx_.target, tx_.value, std::nullopt, 0)) {
            trace_.outcome = Outcome::Reverted;
            return std::move(trace_);
        }
        if (route.kind == Route::Kind::NoCode) {
            trace_.outcome = Outcome::Halted;
            return std::move(trace_);
        }

        Frame frame{
            0,
            tx_.target,
            tx_.target,
            tx_.caller,
            tx_.value,
            encode_calldata(tx_.selector, tx_.args),
            world_.package_at(tx_.target),
            route.function->selector,
            route.function->entry_pc,
            0,
            {},
            {}};
        trace_.frames.push_back(
            {0, std::nullopt, tx_.target, tx_.target, tx_.caller, tx_.value,
             route.function->selector, route.function->name, route.function->entry_pc,
             std::nullopt, 0, false});

        auto result = run_frame(frame);
        trace_.return_data = std::move(result.output);
        switch (result.status) {
        case Status::Halted:
            trace_.outcome = Outcome::Halted;
            break;
        case Status::Reverted:
            trace_.outcome = Outcome::Reverted;
            trace_.frames[0].reverted = true;
            rollback(0, 0);
            break;
        case Status::OutOfSteps:
            trace_.outcome = Outcome::OutOfSteps;
            trace_.frames[0].reverted = true;
            rollback(0, 0);
            break;
        }
        for (auto const &e : trace_.events) {
            trace_.touched_contracts.insert(e.contract);
        }
        return std::move(trace_);
    }

    FrameResult Interpreter::run_frame(Frame &frame)
    {
        auto const &code = frame.package->code;
        auto const &dests = jumpdests(frame.package);
        std::size_t pc = frame.entry_pc;

        auto revert = [] { return FrameResult{Status::Reverted, {}}; };

        while (true) {
            if (pc >= code.size()) {
                return {Status::Halted, {}};
            }
            auto const entry = lookup(code[pc]);
            if (!entry || (entry->immediate_bytes > 0 && pc + entry->immediate_bytes >= code.size())) {
                return revert();
            }
            if (trace_.steps >= tx_.step_budget) {
                return {Status::OutOfSteps, {}};
            }
            auto const op = entry->op;
            if (frame.stack.size() < entry->min_depth) {
                return revert();
            }
            auto const consumed = is_dup(op) || is_swap(op) ? 0u : entry->min_depth;
            if (frame.stack.size() - consumed + entry->pushes > max_stack_depth) {
                return revert();
            }
            ++trace_.steps;

            if (is_critical(op)) {
                auto result = execute_call(frame, op, pc);
                if (result.status != Status::Halted) {
                    return result;
                }
                ++pc;
                continue;
            }

            auto &ev = begin_event(frame, op, pc);
            auto const index = ev.index;
            auto pop = [&]() {
                auto const top = frame.stack.back();
                frame.stack.pop_back();
                trace_.events[index].operands.push_back({top.value, top.id});
                return top;
            };
            auto push = [&](Word value) {
                auto const id = fresh_value();
                frame.stack.push_back({value, id});
                trace_.events[index].writes.push_back(Location::stack(id));
            };
            auto read_stack = [&](StackEntry const &s) {
                trace_.events[index].reads.push_back(Location::stack(s.id));
            };
            auto reads = [&]() -> std::vector<Location> & { return trace_.events[index].reads; };
            auto writes = [&]() -> std::vector<Location> & { return trace_.events[index].writes; };
            auto finish = [&] {
                normalize(reads());
                normalize(writes());
            };

            std::size_t next_pc = pc + 1 + entry->immediate_bytes;

            if (is_push(op)) {
                Word imm = 0;
                for (std::size_t i = 1; i <= entry->immediate_bytes; ++i) {
                    imm = (imm << 8) | code[pc + i];
                }
                push(imm);
                finish();
                pc = next_pc;
                continue;
            }
            if (is_dup(op)) {
                auto const n = static_cast<std::size_t>(op) - static_cast<std::size_t>(Opcode::DUP1) + 1;
                auto const src = frame.stack[frame.stack.size() - n];
                trace_.events[index].operands.push_back({src.value, src.id});
                read_stack(src);
                push(src.value);
                finish();
                pc = next_pc;
                continue;
            }
            if (is_swap(op)) {
                auto const n = static_cast<std::size_t>(op) - static_cast<std::size_t>(Opcode::SWAP1) + 1;
                auto &top = frame.stack.back();
                auto &other = frame.stack[frame.stack.size() - 1 - n];
                trace_.events[index].operands.push_back({top.value, top.id});
                trace_.events[index].operands.push_back({other.value, other.id});
                std::swap(top, other);
                pc = next_pc;
                continue;
            }

            switch (op) {
            case Opcode::STOP:
                return {Status::Halted, {}};
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
                read_stack(a);
                read_stack(b);
                Word r = 0;
                switch (op) {
                case Opcode::ADD:
                    r = a.value + b.value;
                    break;
                case Opcode::MUL:
                    r = a.value * b.value;
                    break;
                case Opcode::SUB:
                    r = a.value - b.value;
                    break;
                case Opcode::DIV:
                    r = b.value == 0 ? 0 : a.value / b.value;
                    break;
                case Opcode::LT:
                    r = a.value < b.value ? 1 : 0;
                    break;
                case Opcode::GT:
                    r = a.value > b.value ? 1 : 0;
                    break;
                case Opcode::EQ:
                    r = a.value == b.value ? 1 : 0;
                    break;
                case Opcode::AND:
                    r = a.value & b.value;
                    break;
                default:
                    r = a.value | b.value;
                    break;
                }
                push(r);
                break;
            }
            case Opcode::ISZERO: {
                auto const a = pop();
                read_stack(a);
                push(a.value == 0 ? 1 : 0);
                break;
            }
            case Opcode::NOT: {
                auto const a = pop();
                read_stack(a);
                push(~a.value);
                break;
            }
            case Opcode::BALANCE: {
                auto const a = pop();
                read_stack(a);
                push(world_.balance(a.value));
                break;
            }
            case Opcode::ORIGIN:
                reads().push_back(Location::env(EnvField::Origin, 0));
                push(tx_.origin);
                break;
            case Opcode::CALLER:
                reads().push_back(Location::env(EnvField::Caller, frame.id));
                push(frame.caller);
                break;
            case Opcode::CALLVALUE:
                reads().push_back(Location::env(EnvField::CallValue, frame.id));
                push(frame.value);
                break;
            case Opcode::CALLDATALOAD: {
                auto const off = pop();
                read_stack(off);
                reads().push_back(Location::env(EnvField::Calldata, frame.id));
                Word w = 0;
                for (std::size_t i = 0; i < 8; ++i) {
                    auto const at = off.value + i;
                    std::uint8_t byte = 0;
                    if (at >= off.value && at < frame.calldata.size()) {
                        byte = frame.calldata[at];
                    }
                    w = (w << 8) | byte;
                }
                push(w);
                break;
            }
            case Opcode::CALLDATASIZE:
                reads().push_back(Location::env(EnvField::Calldata, frame.id));
                push(frame.calldata.size());
                break;
            case Opcode::POP:
                pop();
                break;
            case Opcode::MLOAD: {
                auto const off = pop();
                read_stack(off);
                if (!ensure_memory(frame, off.value, 8)) {
                    finish();
                    return revert();
                }
                add_words(reads(), frame.id, off.value, 8);
                push(read_memory_word(frame, off.value));
                break;
            }
            case Opcode::MSTORE: {
                auto const off = pop();
                auto const val = pop();
                read_stack(off);
                read_stack(val);
                if (!ensure_memory(frame, off.value, 8)) {
                    finish();
                    return revert();
                }
                add_words(writes(), frame.id, off.value, 8);
                write_memory_word(frame, off.value, val.value);
                break;
            }
            case Opcode::SLOAD: {
                auto const key = pop();
                read_stack(key);
                reads().push_back(Location::storage(frame.storage_context, key.value));
                auto const &storage = world_.find(frame.storage_context)->storage;
                auto const it = storage.find(key.value);
                push(it == storage.end() ? 0 : it->second);
                break;
            }
            case Opcode::SSTORE: {
                auto const key = pop();
                auto const val = pop();
                read_stack(key);
                read_stack(val);
                writes().push_back(Location::storage(frame.storage_context, key.value));
                set_storage(frame.storage_context, key.value, val.value);
                break;
            }
            case Opcode::JUMP: {
                auto const dest = pop();
                read_stack(dest);
                finish();
                if (dest.value >= code.size() || !dests[dest.value]) {
                    return revert();
                }
                pc = dest.value;
                continue;
            }
            case Opcode::JUMPI: {
                auto const dest = pop();
                auto const cond = pop();
                read_stack(dest);
                read_stack(cond);
                finish();
                if (cond.value != 0) {
                    if (dest.value >= code.size() || !dests[dest.value]) {
                        return revert();
                    }
                    pc = dest.value;
                    continue;
                }
                pc = next_pc;
                continue;
            }
            case Opcode::JUMPDEST:
                break;
            case Opcode::RETURN:
            case Opcode::REVERT: {
                auto const off = pop();
                auto const size = pop();
                read_stack(off);
                read_stack(size);
                if (!ensure_memory(frame, off.value, size.value)) {
                    finish();
                    return revert();
                }
                add_words(reads(), frame.id, off.value, size.value);
                finish();
                std::vector<std::uint8_t> out(
                    frame.memory.begin() + static_cast<std::ptrdiff_t>(off.value),
                    frame.memory.begin() + static_cast<std::ptrdiff_t>(off.value + size.value));
                return {op == Opcode::RETURN ? Status::Halted : Status::Reverted, std::move(out)};
            }
            default:
                finish();
                return revert();
            }
            finish();
            pc = next_pc;
        }
    }

    FrameResult Interpreter::execute_call(Frame &frame, Opcode op, std::size_t pc)
    {
        auto const index = begin_event(frame, op, pc).index;
        auto pop = [&]() {
            auto const top = frame.stack.back();
            frame.stack.pop_back();
            auto &ev = trace_.events[index];
            ev.operands.push_back({top.value, top.id});
            ev.reads.push_back(Location::stack(top.id));
            return top;
        };

        pop(); // gas is not metered
        auto const target = pop().value;
        Word value = 0;
        if (op != Opcode::DELEGATECALL) {
            value = pop().value;
        }
        auto const args_off = pop().value;
        auto const args_size = pop().value;
        auto const ret_off = pop().value;
        auto const ret_size = pop().value;

        auto finish_event = [&](bool success) {
            auto const id = fresh_value();
            frame.stack.push_back({success ? Word{1} : Word{0}, id});
            auto &ev = trace_.events[index];
            ev.writes.push_back(Location::stack(id));
            ev.writes.push_back(Location::call_return(index));
            normalize(ev.reads);
            normalize(ev.writes);
        };

        if (!ensure_memory(frame, args_off, args_size) || !ensure_memory(frame, ret_off, ret_size)) {
            normalize(trace_.events[index].reads);
            return {Status::Reverted, {}};
        }
        add_words(trace_.events[index].reads, frame.id, args_off, args_size);

        std::vector<std::uint8_t> calldata(
            frame.memory.begin() + static_cast<std::ptrdiff_t>(args_off),
            frame.memory.begin() + static_cast<std::ptrdiff_t>(args_off + args_size));

        if (frame.depth + 1 >= max_call_depth) {
            finish_event(false);
            return {Status::Halted, {}};
        }
        if (value > world_.balance(frame.storage_context)) {
            finish_event(false);
            return {Status::Halted, {}};
        }

        auto const route = world_.route(target, selector_from_calldata(calldata));
        switch (route.kind) {
        case Route::Kind::Missing:
        case Route::Kind::Unmatched:
            finish_event(false);
            return {Status::Halted, {}};
        case Route::Kind::NoCode: {
            bool ok = true;
            if (op == Opcode::CALL) {
                ok = transfer(frame.storage_context, target, value, index, frame.id);
            }
            finish_event(ok);
            return {Status::Halted, {}};
        }
        case Route::Kind::Function:
        case Route::Kind::Fallback:
            break;
        }

        auto const journal_mark = journal_.size();
        auto const transfer_mark = trace_.value_transfers.size();

        Frame callee{
            static_cast<FrameId>(trace_.frames.size()),
            target,
            target,
            frame.storage_context,
            value,
            std::move(calldata),
            world_.package_at(target),
            route.function->selector,
            route.function->entry_pc,
            frame.depth + 1,
            {},
            {}};
        if (op == Opcode::CALLCODE) {
            callee.storage_context = frame.storage_context;
        }
        else if (op == Opcode::DELEGATECALL) {
            callee.storage_context = frame.storage_context;
            callee.caller = frame.caller;
            callee.value = frame.value;
        }

        if (op == Opcode::CALL &&
            !transfer(frame.storage_context, target, value, index, frame.id)) {
            finish_event(false);
            return {Status::Halted, {}};
        }

        {
            auto &ev = trace_.events[index];
            ev.writes.push_back(Location::env(EnvField::Calldata, callee.id));
            ev.writes.push_back(Location::env(EnvField::Caller, callee.id));
            ev.writes.push_back(Location::env(EnvField::CallValue, callee.id));
            ev.reads.push_back(Location::env(EnvField::Caller, frame.id));
            ev.reads.push_back(Location::env(EnvField::CallValue, frame.id));
        }

        trace_.frames.push_back(
            {callee.id, frame.id, callee.code_owner, callee.storage_context, callee.caller,
             callee.value, callee.selector, route.function->name, callee.entry_pc, index,
             callee.depth, false});

        auto result = run_frame(callee);
        if (result.status == Status::OutOfSteps) {
            normalize(trace_.events[index].reads);
            normalize(trace_.events[index].writes);
            trace_.frames[callee.id].reverted = true;
            return result;
        }
        bool const success = result.status == Status::Halted;
        if (!success) {
            trace_.frames[callee.id].reverted = true;
            rollback(journal_mark, transfer_mark);
        }
        else {
            auto const copied = std::min<Word>(ret_size, result.output.size());
            std::copy_n(result.output.begin(), copied,
                        frame.memory.begin() + static_cast<std::ptrdiff_t>(ret_off));
            add_words(trace_.events[index].writes, frame.id, ret_off, copied);
        }
        finish_event(success);
        return {Status::Halted, {}};
    }

    ExecutionTrace execute_transaction(WorldState &world, TransactionRequest const &tx)
    {
        return Interpreter(world, tx).run();
    }
}
