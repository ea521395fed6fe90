#pragma once

#include <xcfuzz/learner/tokens.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace xcfuzz::learner
{
    inline constexpr std::size_t embedding_dims = 20;

    using TokenVector = std::array<double, embedding_dims>;

    struct EmbeddingParams
    {
        std::size_t window = 5;
        std::size_t negatives = 5;
        std::size_t epochs = 10;
        double learning_rate = 0.025;

        bool operator==(EmbeddingParams const &) const = default;
    };

    /// Skip-gram word vectors over opcode tokens.
    struct Embedding
    {
        EmbeddingParams params;
        std::uint64_t seed = 0;
        std::map<std::string, TokenVector> vectors;

        /// The token's vector, or zeros for an unknown token.
        TokenVector const &lookup(std::string const &token) const;

        bool operator==(Embedding const &) const = default;
    };

    /// Skip-gram with negative sampling (unigram^0.75 noise distribution),
    /// randomly shrunk windows and a linearly decaying learning rate.
    /// Deterministic given `seed`. Throws std::invalid_argument when the
    /// corpus holds no tokens.
    Embedding train_embedding(std::span<TokenSequence const> corpus, std::uint64_t seed,
                              EmbeddingParams const &params = {});
}
