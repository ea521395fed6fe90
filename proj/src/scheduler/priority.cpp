#include <xcfuzz/scheduler/priority.hpp>

#include <xcfuzz/analysis/function.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace xcfuzz::scheduler
{
    double function_priority(FunctionShape const &shape, bool suspicious)
    {
        double const f_s = suspicious ? 0.5 : 1.0;
        return f_s * static_cast<double>(shape.callers + 1) * static_cast<double>(shape.params + 1);
    }

    std::uint64_t caller_priority(FunctionShape const &caller)
    {
        return (caller.cond_distance + 1) * (caller.complexity + 1);
    }

    std::string chain_string(Chain const &chain)
    {
        std::string out;
        for (auto const &f : chain) {
            if (!out.empty()) {
                out += " -> ";
            }
            out += f.str();
        }
        return out;
    }

    namespace
    {
        void extend(CallGraph const &cg, Chain &chain, std::size_t max_depth,
                    std::vector<Chain> &out)
        {
            if (chain.size() >= max_depth) {
                return;
            }
            for (auto const &caller : cg.callers(chain.front())) {
                if (std::find(chain.begin(), chain.end(), caller) != chain.end()) {
                    continue;
                }
                chain.insert(chain.begin(), caller);
                out.push_back(chain);
                extend(cg, chain, max_depth, out);
                chain.erase(chain.begin());
            }
        }
    }

    std::vector<Chain> enumerate_paths(CallGraph const &cg, FunctionRef const &target,
                                       std::size_t max_depth, bool direct_entry)
    {
        if (!cg.contains(target)) {
            throw std::invalid_argument(
                fmt::format("function '{}' is not in the call graph", target.str()));
        }
        if (max_depth == 0) {
            throw std::invalid_argument("path depth must be at least 1");
        }
        std::vector<Chain> out;
        if (direct_entry) {
            out.push_back({target});
        }
        Chain chain{target};
        extend(cg, chain, max_depth, out);
        std::sort(out.begin(), out.end(), [](Chain const &a, Chain const &b) {
            return chain_string(a) < chain_string(b);
        });
        return out;
    }

    WorkQueue prioritize(std::vector<ScoredFunction> functions)
    {
        std::sort(functions.begin(), functions.end(),
                  [](ScoredFunction const &a, ScoredFunction const &b) {
                      if (a.s_func != b.s_func) {
                          return a.s_func < b.s_func;
                      }
                      return a.ref < b.ref;
                  });
        WorkQueue queue;
        for (auto &f : functions) {
            std::vector<std::pair<std::string, PrioritizedPath *>> keyed;
            for (auto &p : f.paths) {
                keyed.emplace_back(chain_string(p.chain), &p);
            }
            std::sort(keyed.begin(), keyed.end(), [](auto const &a, auto const &b) {
                if (a.second->scores.s_caller != b.second->scores.s_caller) {
                    return a.second->scores.s_caller < b.second->scores.s_caller;
                }
                return a.first < b.first;
            });
            for (auto const &[key, p] : keyed) {
                queue.push_back(std::move(*p));
            }
        }
        return queue;
    }

    WorkQueue build_queue(std::span<vm::ContractPackage const> packages, CallGraph const &cg,
                          SuspicionMap const &suspicious, QueueOptions const &options)
    {
        std::map<FunctionRef, FunctionShape> shapes;
        std::map<FunctionRef, bool> is_public;
        for (auto const &pkg : packages) {
            for (auto const &fn : pkg.functions) {
                FunctionRef const ref{pkg.name, fn.name};
                shapes.emplace(ref, analysis::function_shape(analysis::FunctionAnalysis(pkg, fn), cg));
                is_public.emplace(ref, fn.is_public);
            }
        }

        std::vector<ScoredFunction> scored;
        for (auto const &[ref, shape] : shapes) {
            auto const it = suspicious.find(ref.str());
            bool const flagged = it != suspicious.end() && it->second;
            ScoredFunction sf{ref, function_priority(shape, flagged), {}};
            for (auto &chain : enumerate_paths(cg, ref, options.max_depth, is_public.at(ref))) {
                PrioritizedPath p;
                p.target = ref;
                p.target_shape = shape;
                p.scores.f_s = flagged ? 0.5 : 1.0;
                p.scores.s_func = sf.s_func;
                if (chain.size() > 1) {
                    p.scores.s_caller = 0;
                }
                for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
                    auto const &caller = shapes.at(chain[i]);
                    p.caller_shapes.push_back(caller);
                    p.scores.s_caller += caller_priority(caller);
                    auto const *edge = cg.edge(chain[i], chain[i + 1]);
                    p.cross_contract = p.cross_contract ||
                                       (edge != nullptr && edge->kind == analysis::EdgeKind::External);
                }
                p.chain = std::move(chain);
                sf.paths.push_back(std::move(p));
            }
            scored.push_back(std::move(sf));
        }
        return prioritize(std::move(scored));
    }
}
