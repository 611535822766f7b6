#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cfbench {

// splitmix64 step (Steele et al.). Used both as a generator for seed
// derivation and to expand user-facing seeds into full 64-bit states.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives a sub-seed from a master seed and a scope label such as
// "mf_bias/fold3". The label is hashed with FNV-1a and mixed with the
// master through two splitmix64 rounds, so adding new scopes never
// perturbs the streams of existing ones.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view scope) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : scope) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t state = master ^ h;
    splitmix64(state);
    return splitmix64(state);
}

// Deterministic PRNG with platform-independent output. std::mt19937_64 is
// fully specified by the standard; the distributions here avoid
// std::uniform_*_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {
        // Avoid the all-zero state and decorrelate small consecutive seeds.
        splitmix64(s_);
        s0_ = splitmix64(s_);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (s0_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n) by rejection, bias-free.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Fisher-Yates; std::shuffle is implementation-defined, this is not.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t s_;
    std::uint64_t s0_;
};

}  // namespace cfbench
