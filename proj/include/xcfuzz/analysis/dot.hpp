#pragma once

#include <xcfuzz/analysis/callgraph.hpp>
#include <xcfuzz/analysis/cfg.hpp>

#include <string>
#include <string_view>

namespace xcfuzz::analysis
{
    /// Graphviz rendering; one node per block labelled with its
    /// instructions, the virtual exit drawn as a double circle.
    std::string cfg_to_dot(Cfg const &cfg, std::string_view name);

    /// Graphviz rendering; external edges dashed, declared edges labelled.
    std::string call_graph_to_dot(CallGraph const &cg);
}
