#include "steglab/image.hpp"

#include <algorithm>
#include <cmath>

namespace steglab {

ImageTensor to_unit(const ByteImage& img) {
    ImageTensor out(img.h, img.w);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int c = 0; c < 3; ++c) out.at(c, y, x) = img.at(y, x, c) / 255.0f;
    return out;
}

ByteImage to_bytes(const ImageTensor& img) {
    ByteImage out(img.h, img.w);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int c = 0; c < 3; ++c) {
                float v = std::clamp(img.at(c, y, x), 0.0f, 1.0f);
                out.at(y, x, c) = static_cast<uint8_t>(std::lround(v * 255.0f));
            }
    return out;
}

}  // namespace steglab
