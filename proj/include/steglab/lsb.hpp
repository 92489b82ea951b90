#pragma once

#include <cstdint>
#include <optional>

#include "steglab/image.hpp"

namespace steglab {

/// k-bit LSB embedding configuration. Without a scatter seed the hidden bytes
/// go in sequentially; with one, both sides derive the same Fisher-Yates
/// permutation from the seed and scatter/gather through it.
struct LsbConfig {
    int k = 1;  // bits per channel byte replaced, 1..8
    std::optional<uint64_t> scatter_seed;
};

/// Replaces the low k bits of every cover byte with the top k bits of the
/// corresponding hidden byte: S = (C & ~mask) | (H >> (8-k)), mask = (1<<k)-1.
ByteImage lsb_embed_image(const ByteImage& cover, const ByteImage& hidden, const LsbConfig& cfg);

/// Recovers the hidden image's top k bits: H' = (S & mask) << (8-k); the low
/// 8-k bits of each recovered byte are zero.
ByteImage lsb_extract_image(const ByteImage& embedded, const LsbConfig& cfg);

}  // namespace steglab
