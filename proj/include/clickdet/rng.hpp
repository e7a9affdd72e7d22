#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace clickdet::rng {

// splitmix64 step; used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (stream + 1) * 0x9e3779b97f4a7c15ull;
    return splitmix64(s);
}

// Seeded generator around std::mt19937_64. The raw engine output is fully
// specified by the standard; the helpers below avoid std::uniform_*_distribution,
// whose sequences are implementation-defined, so every draw is reproducible
// across compilers and platforms.
class Generator {
public:
    explicit Generator(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, bound), bound > 0. Rejection keeps the draw unbiased.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t x, r;
        do {
            x = next_u64();
            r = x % bound;
        } while (x - r > std::uint64_t(0) - bound);
        return r;
    }

private:
    std::mt19937_64 engine_;
};

// In-place Fisher-Yates shuffle driven by Generator::next_below.
template <typename T>
void shuffle(std::vector<T>& v, Generator& gen) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(gen.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

// k distinct indices sampled without replacement from [0, n), in draw order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Generator& gen) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(gen.next_below(n - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

} // namespace clickdet::rng
