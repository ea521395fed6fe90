#include <xcfuzz/vm/trace.hpp>

#include <fmt/format.h>

namespace xcfuzz::vm
{
    namespace
    {
        std::string_view env_name(std::uint64_t field)
        {
            switch (static_cast<EnvField>(field)) {
            case EnvField::Calldata:
                return "calldata";
            case EnvField::Caller:
                return "caller";
            case EnvField::Origin:
                return "origin";
            case EnvField::CallValue:
                return "callvalue";
            }
            return "?";
        }
    }

    std::string to_string(Location const &loc)
    {
        switch (loc.kind) {
        case LocationKind::StorageSlot:
            return fmt::format("storage({},{})", format_address(loc.a), loc.b);
        case LocationKind::MemoryWord:
            return fmt::format("mem({},{})", loc.a, loc.b);
        case LocationKind::StackValue:
            return fmt::format("v{}", loc.a);
        case LocationKind::EnvInput:
            return fmt::format("env({},{})", env_name(loc.a), loc.b);
        case LocationKind::CallReturn:
            return fmt::format("ret(e{})", loc.a);
        }
        return "?";
    }

    std::string_view to_string(Outcome o)
    {
        switch (o) {
        case Outcome::Halted:
            return "halted";
        case Outcome::Reverted:
            return "reverted";
        case Outcome::OutOfSteps:
            return "out-of-steps";
        }
        return "?";
    }

    std::string serialize(ExecutionTrace const &trace)
    {
        std::string out = fmt::format(
            "outcome={} steps={} return={}\n",
            to_string(trace.outcome),
            trace.steps,
            to_hex(trace.return_data));
        for (auto const &f : trace.frames) {
            out += fmt::format(
                "frame {} parent={} code={} storage={} caller={} value={} fn={} "
                "entry={} depth={} reverted={}\n",
                f.id,
                f.parent ? std::to_string(*f.parent) : "-",
                format_address(f.code_owner),
                format_address(f.storage_context),
                format_address(f.caller),
                f.value,
                f.function,
                f.entry_pc,
                f.depth,
                f.reverted);
        }
        for (auto const &e : trace.events) {
            out += fmt::format(
                "{} {} pc={} code={} frame={} sel={} ops=[",
                e.index,
                info(e.op).mnemonic,
                e.pc,
                format_address(e.contract),
                e.frame,
                e.selector ? format_selector(*e.selector) : "fallback");
            for (auto const &o : e.operands) {
                out += fmt::format("{}:v{} ", o.value, o.id);
            }
            out += "] r=[";
            for (auto const &l : e.reads) {
                out += to_string(l) + " ";
            }
            out += "] w=[";
            for (auto const &l : e.writes) {
                out += to_string(l) + " ";
            }
            out += "]\n";
        }
        for (auto const &t : trace.value_transfers) {
            out += fmt::format(
                "transfer {} -> {} amount={}\n",
                format_address(t.from),
                format_address(t.to),
                t.amount);
        }
        return out;
    }
}
