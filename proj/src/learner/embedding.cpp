#include <xcfuzz/learner/embedding.hpp>

#include <xcfuzz/learner/rng.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xcfuzz::learner
{
    namespace
    {
        constexpr std::size_t unigram_table_size = 1 << 16;

        double sigmoid(double x)
        {
            x = std::clamp(x, -30.0, 30.0);
            return 1.0 / (1.0 + std::exp(-x));
        }
    }

    TokenVector const &Embedding::lookup(std::string const &token) const
    {
        static TokenVector const zero{};
        auto const it = vectors.find(token);
        return it == vectors.end() ? zero : it->second;
    }

    Embedding train_embedding(std::span<TokenSequence const> corpus, std::uint64_t seed,
                              EmbeddingParams const &params)
    {
        // Vocabulary in sorted order so ids do not depend on corpus order.
        std::map<std::string, std::size_t> ids;
        std::size_t total = 0;
        for (auto const &seq : corpus) {
            for (auto const &t : seq) {
                ids.emplace(t, 0);
                ++total;
            }
        }
        if (total == 0) {
            throw std::invalid_argument("embedding corpus is empty");
        }
        std::vector<std::string> words;
        for (auto &[w, id] : ids) {
            id = words.size();
            words.push_back(w);
        }
        auto const v = words.size();
        constexpr auto d = embedding_dims;

        std::vector<std::vector<std::size_t>> encoded;
        std::vector<double> counts(v, 0.0);
        for (auto const &seq : corpus) {
            auto &e = encoded.emplace_back();
            for (auto const &t : seq) {
                auto const id = ids.at(t);
                e.push_back(id);
                counts[id] += 1.0;
            }
        }

        std::vector<std::size_t> table;
        table.reserve(unigram_table_size);
        double norm = 0.0;
        for (auto c : counts) {
            norm += std::pow(c, 0.75);
        }
        double cumulative = 0.0;
        for (std::size_t w = 0; w < v; ++w) {
            cumulative += std::pow(counts[w], 0.75) / norm;
            while (table.size() < unigram_table_size &&
                   static_cast<double>(table.size()) < cumulative * unigram_table_size) {
                table.push_back(w);
            }
        }
        while (table.size() < unigram_table_size) {
            table.push_back(v - 1);
        }

        Rng rng(seed);
        std::vector<double> input(v * d);
        std::vector<double> output(v * d, 0.0);
        for (auto &x : input) {
            x = (rng.uniform() - 0.5) / static_cast<double>(d);
        }

        auto const steps = static_cast<double>(params.epochs * total) + 1.0;
        double processed = 0.0;
        std::vector<double> grad(d);
        for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
            for (auto const &seq : encoded) {
                for (std::size_t i = 0; i < seq.size(); ++i) {
                    auto const lr =
                        params.learning_rate * std::max(1e-4, 1.0 - processed / steps);
                    processed += 1.0;
                    auto const shrink = params.window == 0 ? 0 : rng.below(params.window);
                    auto const reach = params.window - shrink;
                    auto const lo = i >= reach ? i - reach : 0;
                    auto const hi = std::min(seq.size() - 1, i + reach);
                    for (auto j = lo; j <= hi; ++j) {
                        if (j == i) {
                            continue;
                        }
                        // Input vector of the centre word predicts the
                        // context word against sampled noise words.
                        double *in = &input[seq[i] * d];
                        std::fill(grad.begin(), grad.end(), 0.0);
                        for (std::size_t n = 0; n <= params.negatives; ++n) {
                            std::size_t target = seq[j];
                            double label = 1.0;
                            if (n > 0) {
                                target = table[rng.below(table.size())];
                                if (target == seq[j]) {
                                    continue;
                                }
                                label = 0.0;
                            }
                            double *out = &output[target * d];
                            double dot = 0.0;
                            for (std::size_t k = 0; k < d; ++k) {
                                dot += in[k] * out[k];
                            }
                            auto const g = (label - sigmoid(dot)) * lr;
                            for (std::size_t k = 0; k < d; ++k) {
                                grad[k] += g * out[k];
                                out[k] += g * in[k];
                            }
                        }
                        for (std::size_t k = 0; k < d; ++k) {
                            in[k] += grad[k];
                        }
                    }
                }
            }
        }

        Embedding emb;
        emb.params = params;
        emb.seed = seed;
        for (std::size_t w = 0; w < v; ++w) {
            TokenVector vec;
            std::copy_n(&input[w * d], d, vec.begin());
            emb.vectors.emplace(words[w], vec);
        }
        return emb;
    }
}
