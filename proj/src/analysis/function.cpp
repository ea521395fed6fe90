#include <xcfuzz/analysis/function.hpp>

#include <algorithm>

namespace xcfuzz::analysis
{
    CfgOptions function_boundaries(vm::ContractPackage const &pkg,
                                   vm::FunctionDescriptor const &fn)
    {
        CfgOptions options;
        for (auto const &f : pkg.functions) {
            if (f.entry_pc != fn.entry_pc) {
                options.boundaries.insert(f.entry_pc);
            }
        }
        return options;
    }

    FunctionAnalysis::FunctionAnalysis(vm::ContractPackage const &pkg,
                                       vm::FunctionDescriptor const &fn)
        : package_(&pkg)
        , function_(&fn)
        , cfg_(Cfg::build(pkg.code, fn.entry_pc, function_boundaries(pkg, fn)))
        , pdom_(cfg_)
        , control_(control_dependencies(cfg_, pdom_))
        , absint_(cfg_)
    {
    }

    std::vector<vm::Instruction> FunctionAnalysis::reachable_instructions() const
    {
        std::vector<vm::Instruction> out;
        for (auto const &blk : cfg_.blocks()) {
            auto const span = cfg_.instructions(blk.id);
            out.insert(out.end(), span.begin(), span.end());
        }
        return out;
    }

    bool FunctionAnalysis::contains(vm::Opcode op) const
    {
        auto const ins = reachable_instructions();
        return std::any_of(ins.begin(), ins.end(),
                           [op](vm::Instruction const &i) { return i.op == op; });
    }

    std::vector<BlockId> FunctionAnalysis::conditional_blocks() const
    {
        std::vector<BlockId> out;
        for (auto const &blk : cfg_.blocks()) {
            if (blk.terminator == Terminator::JumpI) {
                out.push_back(blk.id);
            }
        }
        return out;
    }

    std::vector<std::size_t> FunctionAnalysis::internal_targets() const
    {
        std::vector<std::size_t> out;
        for (auto const &blk : cfg_.blocks()) {
            if (blk.cut_target) {
                out.push_back(*blk.cut_target);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
}
