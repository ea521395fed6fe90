#include <xcfuzz/learner/tokens.hpp>

#include <algorithm>
#include <set>

namespace xcfuzz::learner
{
    std::string_view token_of(vm::Opcode op)
    {
        return vm::collapsed_mnemonic(op);
    }

    std::vector<std::string> const &vocabulary()
    {
        static std::vector<std::string> const vocab = [] {
            std::set<std::string> tokens;
            for (auto const &o : vm::all_opcodes()) {
                tokens.insert(std::string(token_of(o.op)));
            }
            return std::vector<std::string>(tokens.begin(), tokens.end());
        }();
        return vocab;
    }

    TokenSequence tokenize(analysis::FunctionAnalysis const &fa)
    {
        TokenSequence out;
        for (auto const &ins : fa.reachable_instructions()) {
            out.emplace_back(token_of(ins.op));
        }
        return out;
    }

    TokenSequence tokenize(vm::ContractPackage const &pkg, vm::FunctionDescriptor const &fn)
    {
        return tokenize(analysis::FunctionAnalysis(pkg, fn));
    }
}
