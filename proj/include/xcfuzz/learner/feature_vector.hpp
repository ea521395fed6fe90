#pragma once

#include <xcfuzz/analysis/features.hpp>
#include <xcfuzz/learner/embedding.hpp>
#include <xcfuzz/learner/tokens.hpp>
#include <xcfuzz/vm/world.hpp>

#include <span>
#include <string>
#include <vector>

namespace xcfuzz::learner
{
    inline constexpr std::size_t feature_dims =
        embedding_dims + analysis::StaticFeatures::count;
    static_assert(feature_dims == 27);

    /// [0, 20): mean token vector; [20, 27): static flags as 0/1 in
    /// StaticFeatures order.
    using FeatureVector = std::vector<double>;

    FeatureVector build_feature_vector(TokenSequence const &tokens, Embedding const &emb,
                                       analysis::StaticFeatures const &sf);

    /// Per-function inputs to the learner.
    struct FunctionSample
    {
        std::string contract;
        std::string function;
        TokenSequence tokens;
        analysis::StaticFeatures features;
    };

    /// One sample per function, in package then manifest order.
    std::vector<FunctionSample> extract_samples(std::span<vm::ContractPackage const> packages);
}
