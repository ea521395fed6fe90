#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace xcfuzz::learner
{
    /// Seeded generator whose outputs are fixed by the standard
    /// (mt19937_64) and by the integer-only derivations below, so streams
    /// are identical across runs and standard libraries.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed)
            : engine_(seed)
        {
        }

        std::uint64_t next()
        {
            return engine_();
        }

        /// Uniform in [0, n); 0 when n is 0.
        std::uint64_t below(std::uint64_t n);

        /// Uniform in [0, 1) with 53 bits of precision.
        double uniform()
        {
            return static_cast<double>(next() >> 11) * 0x1.0p-53;
        }

        bool chance(double p)
        {
            return uniform() < p;
        }

        template <typename T>
        T const &pick(std::vector<T> const &v)
        {
            return v[below(v.size())];
        }

        template <typename T>
        void shuffle(std::vector<T> &v)
        {
            for (std::size_t i = v.size(); i > 1; --i) {
                std::swap(v[i - 1], v[below(i)]);
            }
        }

    private:
        std::mt19937_64 engine_;
    };

    /// Independent stream seed for (seed, stream) via SplitMix64 mixing.
    std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

    /// 64-bit FNV-1a; stable names-to-streams mapping.
    constexpr std::uint64_t fnv1a64(std::string_view text)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : text) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }
}
