#include <xcfuzz/analysis/dependency.hpp>

#include <algorithm>
#include <map>

namespace xcfuzz::analysis
{
    void DependencyGraph::add(std::size_t from, std::size_t to, DepKind kind)
    {
        auto &preds = preds_.at(to);
        DepEdge const edge{from, kind};
        auto const it = std::lower_bound(preds.begin(), preds.end(), edge);
        if (it == preds.end() || *it != edge) {
            preds.insert(it, edge);
        }
    }

    bool DependencyGraph::has_edge(std::size_t from, std::size_t to,
                                   std::optional<DepKind> kind) const
    {
        for (auto const &e : preds_.at(to)) {
            if (e.from == from && (!kind || e.kind == *kind)) {
                return true;
            }
        }
        return false;
    }

    std::size_t DependencyGraph::edge_count() const
    {
        std::size_t n = 0;
        for (auto const &p : preds_) {
            n += p.size();
        }
        return n;
    }

    std::vector<bool> DependencyGraph::closure(std::size_t node,
                                               std::optional<DepKind> kind) const
    {
        std::vector<bool> seen(preds_.size(), false);
        std::vector<std::size_t> work{node};
        while (!work.empty()) {
            auto const n = work.back();
            work.pop_back();
            for (auto const &e : preds_[n]) {
                if (kind && e.kind != *kind) {
                    continue;
                }
                if (!seen[e.from]) {
                    seen[e.from] = true;
                    work.push_back(e.from);
                }
            }
        }
        return seen;
    }

    void DependencyGraph::merge(DependencyGraph const &other)
    {
        if (other.size() > preds_.size()) {
            preds_.resize(other.size());
        }
        for (std::size_t to = 0; to < other.size(); ++to) {
            for (auto const &e : other.preds_[to]) {
                add(e.from, to, e.kind);
            }
        }
    }

    DependencyGraph control_dependencies(Cfg const &cfg, PostDomTree const &pdom)
    {
        DependencyGraph g(cfg.size());
        for (BlockId a = 0; a < cfg.size(); ++a) {
            auto const stop = pdom.ipdom(a);
            if (!stop) {
                continue;
            }
            for (auto b : cfg.successors(a)) {
                if (!pdom.in_tree(b)) {
                    continue;
                }
                // Walk up from b to ipdom(a); every node passed is
                // control-dependent on a.
                for (std::optional<BlockId> cur = b; cur && *cur != *stop;
                     cur = pdom.ipdom(*cur)) {
                    g.add(a, *cur, DepKind::Control);
                }
            }
        }
        return g;
    }

    DependencyGraph data_dependencies(vm::ExecutionTrace const &trace)
    {
        DependencyGraph g(trace.events.size());
        std::map<vm::Location, std::vector<std::size_t>> writers;
        for (auto const &ev : trace.events) {
            for (auto const &loc : ev.reads) {
                auto const it = writers.find(loc);
                if (it == writers.end()) {
                    continue;
                }
                for (auto w : it->second) {
                    g.add(w, ev.index, DepKind::Data);
                }
            }
            for (auto const &loc : ev.writes) {
                writers[loc].push_back(ev.index);
            }
        }
        return g;
    }

    namespace
    {
        struct FrameStatic
        {
            Cfg cfg;
            DependencyGraph control;
        };
    }

    DependencyGraph dynamic_control_dependencies(
        vm::ExecutionTrace const &trace, std::span<vm::ContractPackage const> packages)
    {
        DependencyGraph g(trace.events.size());

        std::map<std::pair<vm::Address, std::size_t>, FrameStatic> statics;
        auto static_for = [&](vm::Address owner, std::size_t entry) -> FrameStatic const * {
            auto const key = std::make_pair(owner, entry);
            auto const it = statics.find(key);
            if (it != statics.end()) {
                return &it->second;
            }
            auto const pkg = std::find_if(packages.begin(), packages.end(),
                                          [&](auto const &p) { return p.address == owner; });
            if (pkg == packages.end()) {
                return nullptr;
            }
            auto cfg = Cfg::build(pkg->code, entry);
            PostDomTree const pdom(cfg);
            auto control = control_dependencies(cfg, pdom);
            return &statics.emplace(key, FrameStatic{std::move(cfg), std::move(control)})
                        .first->second;
        };

        // Per frame: block id -> index of its most recent JUMPI event.
        std::map<vm::FrameId, std::map<BlockId, std::size_t>> last_branch;
        for (auto const &ev : trace.events) {
            auto const &frame = trace.frame(ev.frame);
            auto const *st = static_for(frame.code_owner, frame.entry_pc);
            if (st == nullptr) {
                continue;
            }
            auto const block = st->cfg.block_containing(ev.pc);
            if (!block) {
                continue;
            }
            auto &branches = last_branch[ev.frame];
            for (auto const &dep : st->control.dependencies(*block)) {
                auto const it = branches.find(dep.from);
                if (it != branches.end()) {
                    g.add(it->second, ev.index, DepKind::Control);
                }
            }
            if (ev.op == vm::Opcode::JUMPI) {
                branches[*block] = ev.index;
            }
        }
        return g;
    }

    DependencyGraph trace_dependencies(
        vm::ExecutionTrace const &trace, std::span<vm::ContractPackage const> packages)
    {
        auto g = data_dependencies(trace);
        g.merge(dynamic_control_dependencies(trace, packages));
        return g;
    }
}
