#include <xcfuzz/learner/rng.hpp>

#include <limits>

namespace xcfuzz::learner
{
    std::uint64_t Rng::below(std::uint64_t n)
    {
        if (n == 0) {
            return 0;
        }
        // Rejection keeps the draw unbiased.
        auto const limit = std::numeric_limits<std::uint64_t>::max() -
                           std::numeric_limits<std::uint64_t>::max() % n;
        for (;;) {
            auto const x = next();
            if (x < limit) {
                return x % n;
            }
        }
    }

    std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
    {
        auto z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
}
