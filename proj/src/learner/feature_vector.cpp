#include <xcfuzz/learner/feature_vector.hpp>

#include <xcfuzz/analysis/callgraph.hpp>
#include <xcfuzz/analysis/function.hpp>

namespace xcfuzz::learner
{
    FeatureVector build_feature_vector(TokenSequence const &tokens, Embedding const &emb,
                                       analysis::StaticFeatures const &sf)
    {
        FeatureVector fv(feature_dims, 0.0);
        for (auto const &t : tokens) {
            auto const &v = emb.lookup(t);
            for (std::size_t k = 0; k < embedding_dims; ++k) {
                fv[k] += v[k];
            }
        }
        if (!tokens.empty()) {
            auto const n = static_cast<double>(tokens.size());
            for (std::size_t k = 0; k < embedding_dims; ++k) {
                fv[k] /= n;
            }
        }
        auto const flags = sf.as_array();
        for (std::size_t k = 0; k < flags.size(); ++k) {
            fv[embedding_dims + k] = flags[k] ? 1.0 : 0.0;
        }
        return fv;
    }

    std::vector<FunctionSample> extract_samples(std::span<vm::ContractPackage const> packages)
    {
        auto const cg = analysis::build_call_graph(packages);
        std::vector<FunctionSample> out;
        for (auto const &pkg : packages) {
            for (auto const &fn : pkg.functions) {
                analysis::FunctionAnalysis const fa(pkg, fn);
                out.push_back({pkg.name, fn.name, tokenize(fa),
                               analysis::extract_static_features(fa, cg)});
            }
        }
        return out;
    }
}
