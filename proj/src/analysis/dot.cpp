#include <xcfuzz/analysis/dot.hpp>

#include <fmt/format.h>

namespace xcfuzz::analysis
{
    namespace
    {
        std::string quote(std::string_view s)
        {
            std::string out = "\"";
            for (char c : s) {
                if (c == '"' || c == '\\') {
                    out += '\\';
                }
                out += c;
            }
            return out + "\"";
        }
    }

    std::string cfg_to_dot(Cfg const &cfg, std::string_view name)
    {
        std::string out = fmt::format("digraph {} {{\n  node [shape=box fontname=monospace];\n",
                                      quote(name));
        for (auto const &blk : cfg.blocks()) {
            if (blk.id == cfg.exit()) {
                out += fmt::format("  b{} [label=\"exit\" shape=doublecircle];\n", blk.id);
                continue;
            }
            std::string label;
            for (auto const &ins : cfg.instructions(blk.id)) {
                auto const &meta = vm::info(ins.op);
                label += meta.immediate_bytes > 0
                             ? fmt::format("{:04x} {} 0x{:x}\\l", ins.pc, meta.mnemonic,
                                           ins.immediate)
                             : fmt::format("{:04x} {}\\l", ins.pc, meta.mnemonic);
            }
            out += fmt::format("  b{} [label=\"{}\"{}];\n", blk.id, label,
                               blk.no_exit ? " color=red" : "");
        }
        for (auto const &blk : cfg.blocks()) {
            for (auto s : cfg.successors(blk.id)) {
                out += fmt::format("  b{} -> b{};\n", blk.id, s);
            }
        }
        return out + "}\n";
    }

    std::string call_graph_to_dot(CallGraph const &cg)
    {
        std::string out = "digraph callgraph {\n  node [shape=ellipse];\n";
        for (auto const &n : cg.nodes()) {
            out += fmt::format("  {};\n", quote(n.str()));
        }
        for (auto const &e : cg.edges()) {
            out += fmt::format("  {} -> {} [{}{}];\n", quote(e.caller.str()), quote(e.callee.str()),
                               e.kind == EdgeKind::External ? "style=dashed" : "style=solid",
                               e.declared ? " label=\"declared\"" : "");
        }
        return out + "}\n";
    }
}
