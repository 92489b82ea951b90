#include "steglab/jpeg_append.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace steglab {

namespace {
constexpr std::array<uint8_t, 7> kRarMagic = {0x52, 0x61, 0x72, 0x21, 0x1a, 0x07, 0x00};
}

JpegAppendVerdict jpeg_append_detect(const std::vector<uint8_t>& file_bytes) {
    if (file_bytes.size() < 4 || file_bytes[0] != 0xFF || file_bytes[1] != 0xD8)
        throw std::invalid_argument("jpeg_append_detect: input is not a JPEG (missing SOI)");

    size_t eoi = std::string::npos;
    for (size_t i = file_bytes.size() - 1; i >= 3; --i) {
        if (file_bytes[i - 1] == 0xFF && file_bytes[i] == 0xD9) {
            eoi = i - 1;
            break;
        }
    }
    if (eoi == std::string::npos)
        throw std::runtime_error("jpeg_append_detect: malformed JPEG (no EOI marker)");

    JpegAppendVerdict v;
    v.offset = eoi + 2;
    bool nonzero_tail = std::any_of(file_bytes.begin() + v.offset, file_bytes.end(),
                                    [](uint8_t b) { return b != 0; });
    if (!nonzero_tail) return v;  // clean (or zero padding only)

    v.appended = true;
    v.is_rar = file_bytes.size() - v.offset >= kRarMagic.size() &&
               std::equal(kRarMagic.begin(), kRarMagic.end(), file_bytes.begin() + v.offset);
    return v;
}

}  // namespace steglab
