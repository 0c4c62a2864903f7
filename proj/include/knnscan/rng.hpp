#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace knnscan {

/// Deterministic RNG used everywhere in the library.
///
/// Wraps mt19937_64 but generates uniforms, normals and bounded integers
/// itself, so streams are bit-reproducible across standard library versions.
/// Independent sub-streams are derived from (seed, stream index).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix(seed)) {}

    std::uint64_t nextU64() { return gen_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (hasSpare_) {
            hasSpare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        hasSpare_ = true;
        return r * std::cos(a);
    }

    /// Unbiased integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const std::uint64_t r = nextU64();
            if (r >= threshold) return r % n;
        }
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Independent child stream; derive(i) != derive(j) streams for i != j.
    [[nodiscard]] Rng derive(std::uint64_t stream) const {
        return Rng(splitmix(seed_ ^ (0x9E3779B97F4A7C15ULL * (stream + 1))));
    }

    std::uint64_t seed() const { return seed_; }

    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool hasSpare_ = false;
};

}  // namespace knnscan
