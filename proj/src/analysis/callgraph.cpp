#include <xcfuzz/analysis/callgraph.hpp>

#include <xcfuzz/analysis/function.hpp>

#include <algorithm>

namespace xcfuzz::analysis
{
    std::string_view to_string(EdgeKind kind)
    {
        return kind == EdgeKind::Internal ? "internal" : "external";
    }

    void CallGraph::add_node(FunctionRef const &f)
    {
        nodes_.insert(f);
    }

    void CallGraph::add_edge(CallEdge edge)
    {
        nodes_.insert(edge.caller);
        nodes_.insert(edge.callee);
        auto const key = std::make_pair(edge.caller, edge.callee);
        if (edge_index_.contains(key)) {
            return;
        }
        edge_index_.emplace(key, edges_.size());
        edges_.push_back(std::move(edge));
    }

    std::vector<FunctionRef> CallGraph::callers(FunctionRef const &f) const
    {
        std::vector<FunctionRef> out;
        for (auto const &e : edges_) {
            if (e.callee == f) {
                out.push_back(e.caller);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<FunctionRef> CallGraph::callees(FunctionRef const &f) const
    {
        std::vector<FunctionRef> out;
        for (auto const &e : edges_) {
            if (e.caller == f) {
                out.push_back(e.callee);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    CallEdge const *CallGraph::edge(FunctionRef const &caller, FunctionRef const &callee) const
    {
        auto const it = edge_index_.find({caller, callee});
        return it == edge_index_.end() ? nullptr : &edges_[it->second];
    }

    bool CallGraph::has_external_callee(FunctionRef const &f) const
    {
        return std::any_of(edges_.begin(), edges_.end(), [&](CallEdge const &e) {
            return e.caller == f && e.kind == EdgeKind::External;
        });
    }

    bool CallGraph::has_unresolved_site(FunctionRef const &f) const
    {
        return std::any_of(unresolved_.begin(), unresolved_.end(),
                           [&](UnresolvedSite const &s) { return s.caller == f; });
    }

    CallGraph build_call_graph(std::span<vm::ContractPackage const> packages)
    {
        CallGraph cg;
        auto by_address = [&](vm::Address a) -> vm::ContractPackage const * {
            for (auto const &p : packages) {
                if (p.address == a) {
                    return &p;
                }
            }
            return nullptr;
        };
        auto by_name = [&](std::string_view name) -> vm::ContractPackage const * {
            for (auto const &p : packages) {
                if (p.name == name) {
                    return &p;
                }
            }
            return nullptr;
        };
        auto kind_of = [](FunctionRef const &a, FunctionRef const &b) {
            return a.contract == b.contract ? EdgeKind::Internal : EdgeKind::External;
        };

        for (auto const &pkg : packages) {
            for (auto const &fn : pkg.functions) {
                cg.add_node({pkg.name, fn.name});
            }
        }

        for (auto const &pkg : packages) {
            for (auto const &fn : pkg.functions) {
                FunctionRef const self{pkg.name, fn.name};
                FunctionAnalysis const fa(pkg, fn);

                for (auto pc : fa.internal_targets()) {
                    for (auto const &g : pkg.functions) {
                        if (g.entry_pc == pc) {
                            FunctionRef const callee{pkg.name, g.name};
                            cg.add_edge({self, callee, EdgeKind::Internal, pc, false});
                        }
                    }
                }

                for (auto const &site : fa.absint().call_sites()) {
                    vm::ContractPackage const *target = nullptr;
                    if (site.target.constant) {
                        target = by_address(*site.target.constant);
                    }
                    vm::FunctionDescriptor const *callee = nullptr;
                    if (target != nullptr) {
                        if (site.selector) {
                            callee = target->find_selector(*site.selector);
                            if (callee == nullptr) {
                                callee = target->fallback();
                            }
                        }
                        else if (site.no_selector) {
                            callee = target->fallback();
                        }
                    }
                    if (callee == nullptr) {
                        cg.add_unresolved({self, site.pc, site.op});
                        continue;
                    }
                    FunctionRef const ref{target->name, callee->name};
                    cg.add_edge({self, ref, kind_of(self, ref), site.pc, false});
                }

                for (auto const &decl : fn.declared_calls) {
                    auto const dot = decl.find('.');
                    vm::ContractPackage const *target =
                        dot == std::string::npos ? nullptr : by_name(decl.substr(0, dot));
                    auto const *callee =
                        target == nullptr ? nullptr : target->find_function(decl.substr(dot + 1));
                    if (callee == nullptr) {
                        cg.add_unresolved({self, fn.entry_pc, vm::Opcode::CALL});
                        continue;
                    }
                    FunctionRef const ref{target->name, callee->name};
                    cg.add_edge({self, ref, kind_of(self, ref), std::nullopt, true});
                }
            }
        }
        return cg;
    }
}
