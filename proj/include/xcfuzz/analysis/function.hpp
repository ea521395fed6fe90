#pragma once

#include <xcfuzz/analysis/absint.hpp>
#include <xcfuzz/analysis/cfg.hpp>
#include <xcfuzz/analysis/dependency.hpp>
#include <xcfuzz/analysis/postdom.hpp>
#include <xcfuzz/vm/world.hpp>

namespace xcfuzz::analysis
{
    /// Entry pcs of every function in `pkg` other than `fn`.
    CfgOptions function_boundaries(vm::ContractPackage const &pkg,
                                   vm::FunctionDescriptor const &fn);

    /// Intraprocedural view of one function: its CFG cut at sibling entry
    /// points, post-dominators, static control dependency, and abstract
    /// interpretation. Holds pointers into `pkg`, which must outlive it.
    class FunctionAnalysis
    {
    public:
        FunctionAnalysis(vm::ContractPackage const &pkg, vm::FunctionDescriptor const &fn);

        vm::ContractPackage const &package() const
        {
            return *package_;
        }

        vm::FunctionDescriptor const &function() const
        {
            return *function_;
        }

        Cfg const &cfg() const
        {
            return cfg_;
        }

        PostDomTree const &pdom() const
        {
            return pdom_;
        }

        DependencyGraph const &control() const
        {
            return control_;
        }

        AbstractInterpretation const &absint() const
        {
            return absint_;
        }

        /// Reachable instructions in pc order (the virtual exit excluded).
        std::vector<vm::Instruction> reachable_instructions() const;

        bool contains(vm::Opcode op) const;

        /// Blocks ending in JUMPI, in block-id order.
        std::vector<BlockId> conditional_blocks() const;

        /// Entry pcs of sibling functions that control can jump into.
        std::vector<std::size_t> internal_targets() const;

    private:
        vm::ContractPackage const *package_;
        vm::FunctionDescriptor const *function_;
        Cfg cfg_;
        PostDomTree pdom_;
        DependencyGraph control_;
        AbstractInterpretation absint_;
    };
}
