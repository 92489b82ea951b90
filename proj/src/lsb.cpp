#include "steglab/lsb.hpp"

#include <stdexcept>

#include "steglab/rng.hpp"

namespace steglab {

namespace {

void check_k(int k) {
    if (k < 1 || k > 8) throw std::invalid_argument("lsb: k must be in [1,8]");
}

}  // namespace

ByteImage lsb_embed_image(const ByteImage& cover, const ByteImage& hidden, const LsbConfig& cfg) {
    check_k(cfg.k);
    if (!cover.same_shape(hidden))
        throw std::invalid_argument("lsb_embed_image: cover and hidden dimensions differ");
    const uint8_t mask = static_cast<uint8_t>((1u << cfg.k) - 1u);
    const int shift = 8 - cfg.k;

    ByteImage out = cover;
    if (cfg.scatter_seed) {
        // perm[i] names the hidden byte carried at embedded position i.
        Rng rng(*cfg.scatter_seed);
        auto perm = rng.permutation(hidden.size());
        for (size_t i = 0; i < out.size(); ++i)
            out.data[i] = static_cast<uint8_t>((cover.data[i] & ~mask) |
                                               (hidden.data[perm[i]] >> shift));
    } else {
        for (size_t i = 0; i < out.size(); ++i)
            out.data[i] =
                static_cast<uint8_t>((cover.data[i] & ~mask) | (hidden.data[i] >> shift));
    }
    return out;
}

ByteImage lsb_extract_image(const ByteImage& embedded, const LsbConfig& cfg) {
    check_k(cfg.k);
    const uint8_t mask = static_cast<uint8_t>((1u << cfg.k) - 1u);
    const int shift = 8 - cfg.k;

    ByteImage out(embedded.h, embedded.w);
    if (cfg.scatter_seed) {
        Rng rng(*cfg.scatter_seed);
        auto perm = rng.permutation(embedded.size());
        for (size_t i = 0; i < embedded.size(); ++i)
            out.data[perm[i]] = static_cast<uint8_t>((embedded.data[i] & mask) << shift);
    } else {
        for (size_t i = 0; i < embedded.size(); ++i)
            out.data[i] = static_cast<uint8_t>((embedded.data[i] & mask) << shift);
    }
    return out;
}

}  // namespace steglab
