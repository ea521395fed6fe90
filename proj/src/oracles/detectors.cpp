#include <xcfuzz/oracles/detectors.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace xcfuzz::oracles
{
    using vm::EventIndex;
    using vm::Location;
    using vm::LocationKind;
    using vm::Opcode;

    std::string_view to_string(VulnCategory c)
    {
        switch (c) {
        case VulnCategory::Reentrancy:
            return "reentrancy";
        case VulnCategory::Delegatecall:
            return "delegatecall";
        case VulnCategory::TxOrigin:
            return "tx-origin";
        }
        return "unknown";
    }

    VulnCategory category_from_string(std::string_view text)
    {
        for (auto c : all_categories) {
            if (to_string(c) == text) {
                return c;
            }
        }
        throw std::invalid_argument(fmt::format("unknown category '{}'", text));
    }

    namespace
    {
        bool operand_location(Location const &loc)
        {
            return loc.kind == LocationKind::StackValue || loc.kind == LocationKind::MemoryWord ||
                   loc.kind == LocationKind::CallReturn;
        }

        Finding make_finding(VulnCategory cat, EventIndex critical, EventIndex related,
                             vm::ExecutionTrace const &trace)
        {
            auto const &ev = trace.events.at(critical);
            Finding f;
            f.category = cat;
            f.critical_event = critical;
            f.related_event = related;
            f.critical_pc = ev.pc;
            f.contract = ev.contract;
            f.function = trace.frame(ev.frame).function;
            return f;
        }

        bool reads_tx_calldata(vm::TraceEvent const &ev)
        {
            auto const target = Location::env(vm::EnvField::Calldata, 0);
            return std::find(ev.reads.begin(), ev.reads.end(), target) != ev.reads.end();
        }

        std::set<Location> storage_read_by(std::vector<bool> const &closure,
                                           vm::ExecutionTrace const &trace)
        {
            std::set<Location> out;
            for (EventIndex i = 0; i < closure.size(); ++i) {
                if (!closure[i]) {
                    continue;
                }
                for (auto const &r : trace.events[i].reads) {
                    if (r.kind == LocationKind::StorageSlot) {
                        out.insert(r);
                    }
                }
            }
            return out;
        }

        bool writes_any(vm::TraceEvent const &ev, std::set<Location> const &locs)
        {
            return std::any_of(ev.writes.begin(), ev.writes.end(),
                               [&](Location const &w) { return locs.contains(w); });
        }

        std::optional<EventIndex> first_origin(std::vector<bool> const &closure,
                                               vm::ExecutionTrace const &trace)
        {
            for (EventIndex i = 0; i < closure.size(); ++i) {
                if (closure[i] && trace.events[i].op == Opcode::ORIGIN) {
                    return i;
                }
            }
            return std::nullopt;
        }

        bool delegate_tainted_by_calldata(EventIndex d, DependencyView const &view)
        {
            auto const &closure = view.operand_closure(d);
            for (EventIndex i = 0; i < closure.size(); ++i) {
                if (closure[i] && reads_tx_calldata(view.trace().events[i])) {
                    return true;
                }
            }
            return false;
        }
    }

    DependencyView::DependencyView(vm::ExecutionTrace const &trace,
                                   analysis::DependencyGraph const &deps)
        : trace_(&trace)
        , deps_(&deps)
    {
        if (deps.size() != trace.events.size()) {
            throw std::invalid_argument("dependency graph does not match the trace");
        }
        for (auto const &ev : trace.events) {
            for (auto const &w : ev.writes) {
                if (operand_location(w)) {
                    writers_[w].push_back(ev.index);
                }
            }
        }
    }

    std::vector<EventIndex> DependencyView::seeds(EventIndex event) const
    {
        std::vector<EventIndex> out;
        auto const &ev = trace_->events.at(event);
        for (auto const &r : ev.reads) {
            if (!operand_location(r)) {
                continue;
            }
            auto const it = writers_.find(r);
            if (it == writers_.end()) {
                continue;
            }
            for (auto w : it->second) {
                if (w < event) {
                    out.push_back(w);
                }
            }
        }
        for (auto const &e : deps_->dependencies(event)) {
            if (e.kind == analysis::DepKind::Control) {
                out.push_back(e.from);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::vector<bool> const &DependencyView::operand_closure(EventIndex event) const
    {
        auto const cached = cache_.find(event);
        if (cached != cache_.end()) {
            return cached->second;
        }
        std::vector<bool> seen(trace_->events.size(), false);
        std::deque<EventIndex> work;
        for (auto s : seeds(event)) {
            seen[s] = true;
            work.push_back(s);
        }
        while (!work.empty()) {
            auto const n = work.front();
            work.pop_front();
            for (auto const &e : deps_->dependencies(n)) {
                if (!seen[e.from]) {
                    seen[e.from] = true;
                    work.push_back(e.from);
                }
            }
        }
        return cache_.emplace(event, std::move(seen)).first->second;
    }

    std::vector<Finding> detect_reentrancy(DependencyView const &view)
    {
        auto const &trace = view.trace();
        std::vector<Finding> out;
        for (auto const &c : trace.events) {
            if (!vm::is_critical(c.op)) {
                continue;
            }
            auto const slots = storage_read_by(view.operand_closure(c.index), trace);
            if (slots.empty()) {
                continue;
            }
            for (auto s = c.index + 1; s < trace.events.size(); ++s) {
                auto const &ev = trace.events[s];
                if (ev.op == Opcode::SSTORE && ev.frame == c.frame && writes_any(ev, slots)) {
                    out.push_back(make_finding(VulnCategory::Reentrancy, c.index, s, trace));
                }
            }
        }
        return out;
    }

    std::vector<Finding> detect_delegatecall(DependencyView const &view)
    {
        auto const &trace = view.trace();
        std::vector<Finding> out;
        for (auto const &d : trace.events) {
            if (d.op != Opcode::DELEGATECALL) {
                continue;
            }
            if (delegate_tainted_by_calldata(d.index, view)) {
                out.push_back(make_finding(VulnCategory::Delegatecall, d.index, d.index, trace));
            }
            for (auto c = d.index + 1; c < trace.events.size(); ++c) {
                if (vm::is_critical(trace.events[c].op) && view.operand_closure(c)[d.index]) {
                    out.push_back(make_finding(VulnCategory::Delegatecall, c, d.index, trace));
                }
            }
        }
        return out;
    }

    std::vector<Finding> detect_tx_origin(DependencyView const &view)
    {
        auto const &trace = view.trace();
        std::vector<Finding> out;
        for (auto const &c : trace.events) {
            if (!vm::is_critical(c.op)) {
                continue;
            }
            if (auto const o = first_origin(view.operand_closure(c.index), trace)) {
                out.push_back(make_finding(VulnCategory::TxOrigin, c.index, *o, trace));
            }
        }
        return out;
    }

    std::vector<Finding> detect_reentrancy(vm::ExecutionTrace const &trace,
                                           analysis::DependencyGraph const &deps)
    {
        return detect_reentrancy(DependencyView(trace, deps));
    }

    std::vector<Finding> detect_delegatecall(vm::ExecutionTrace const &trace,
                                             analysis::DependencyGraph const &deps)
    {
        return detect_delegatecall(DependencyView(trace, deps));
    }

    std::vector<Finding> detect_tx_origin(vm::ExecutionTrace const &trace,
                                          analysis::DependencyGraph const &deps)
    {
        return detect_tx_origin(DependencyView(trace, deps));
    }

    Finding classify_cross_contract(Finding finding, vm::ExecutionTrace const &trace)
    {
        finding.contract_addrs = trace.touched_contracts;
        finding.cross_contract = finding.contract_addrs.size() > 2;
        return finding;
    }

    bool witness_holds(Finding const &f, DependencyView const &view)
    {
        auto const &trace = view.trace();
        auto const n = trace.events.size();
        if (f.critical_event >= n || f.related_event >= n) {
            return false;
        }
        auto const &c = trace.events[f.critical_event];
        auto const &r = trace.events[f.related_event];
        if (!vm::is_critical(c.op) || f.critical_pc != c.pc) {
            return false;
        }
        auto const &closure = view.operand_closure(c.index);
        switch (f.category) {
        case VulnCategory::Reentrancy:
            return r.op == Opcode::SSTORE && r.index > c.index && r.frame == c.frame &&
                   writes_any(r, storage_read_by(closure, trace));
        case VulnCategory::Delegatecall:
            if (r.op != Opcode::DELEGATECALL) {
                return false;
            }
            if (c.index == r.index) {
                return delegate_tainted_by_calldata(r.index, view);
            }
            return c.index > r.index && closure[r.index];
        case VulnCategory::TxOrigin:
            return r.op == Opcode::ORIGIN && closure[r.index];
        }
        return false;
    }

    std::vector<Finding> detect_all(vm::ExecutionTrace const &trace,
                                    analysis::DependencyGraph const &deps)
    {
        DependencyView const view(trace, deps);
        std::vector<Finding> out;
        auto append = [&](std::vector<Finding> found) {
            for (auto &f : found) {
                out.push_back(classify_cross_contract(std::move(f), trace));
            }
        };
        append(detect_reentrancy(view));
        append(detect_delegatecall(view));
        append(detect_tx_origin(view));
        return out;
    }

    std::vector<Finding> detect_all(vm::ExecutionTrace const &trace,
                                    std::span<vm::ContractPackage const> packages)
    {
        return detect_all(trace, analysis::trace_dependencies(trace, packages));
    }
}
