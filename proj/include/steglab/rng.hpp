#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace steglab {

/// Deterministic helpers on top of mt19937_64. Distribution sampling is
/// hand-rolled (Box-Muller, modulo bounds) so that a given seed produces the
/// same stream on every standard library implementation.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    uint64_t next_below(uint64_t bound) { return gen_() % bound; }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// In-place Fisher-Yates shuffle driven by next_below; both ends of a
    /// channel derive the identical permutation from the shared seed.
    template <typename V>
    void shuffle(V& values) {
        for (size_t i = values.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    /// The permutation produced by shuffling the identity of length n.
    std::vector<uint32_t> permutation(size_t n) {
        std::vector<uint32_t> p(n);
        for (size_t i = 0; i < n; ++i) p[i] = static_cast<uint32_t>(i);
        shuffle(p);
        return p;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace steglab
