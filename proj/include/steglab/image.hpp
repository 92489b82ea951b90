#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "steglab/tensor.hpp"

namespace steglab {

/// 8-bit RGB image, interleaved row-major (the layout of PPM/PNG payloads).
struct ByteImage {
    int h = 0;
    int w = 0;
    std::vector<uint8_t> data;  // h*w*3 bytes

    ByteImage() = default;
    ByteImage(int height, int width)
        : h(height), w(width), data(static_cast<size_t>(height) * width * 3, 0) {
        if (height <= 0 || width <= 0)
            throw std::invalid_argument("ByteImage: dimensions must be positive");
    }

    size_t size() const { return data.size(); }
    uint8_t& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * w + x) * 3 + c]; }
    uint8_t at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * w + x) * 3 + c]; }

    bool same_shape(const ByteImage& o) const { return h == o.h && w == o.w; }
};

/// Real-valued RGB image in [0,1], planar channel-major (c,h,w) like the
/// tensors it feeds.
struct ImageTensor {
    int h = 0;
    int w = 0;
    std::vector<float> data;  // 3*h*w floats

    ImageTensor() = default;
    ImageTensor(int height, int width)
        : h(height), w(width), data(static_cast<size_t>(height) * width * 3, 0.0f) {
        if (height <= 0 || width <= 0)
            throw std::invalid_argument("ImageTensor: dimensions must be positive");
    }

    size_t size() const { return data.size(); }
    float& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * h + y) * w + x];
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * h + y) * w + x];
    }

    bool same_shape(const ImageTensor& o) const { return h == o.h && w == o.w; }

    void check_range() const {
        for (float v : data)
            if (!(v >= 0.0f && v <= 1.0f))
                throw std::invalid_argument("ImageTensor: values must lie in [0,1]");
    }
};

/// bytes/255 into [0,1].
ImageTensor to_unit(const ByteImage& img);

/// round(v*255) back to bytes; inputs are clamped to [0,1] first.
ByteImage to_bytes(const ImageTensor& img);

/// Stacks images into an [n,3,h,w] batch tensor.
template <typename T>
TensorPtr<T> to_batch(const std::vector<ImageTensor>& images) {
    detail::require(!images.empty(), "to_batch: empty image list");
    int h = images[0].h, w = images[0].w;
    for (const auto& im : images)
        detail::require(im.h == h && im.w == w, "to_batch: images must share one size");
    auto out = make_tensor<T>({static_cast<int64_t>(images.size()), 3, h, w});
    size_t per = static_cast<size_t>(3) * h * w;
    for (size_t i = 0; i < images.size(); ++i)
        for (size_t j = 0; j < per; ++j) out->data[i * per + j] = static_cast<T>(images[i].data[j]);
    return out;
}

/// Splits an [n,3,h,w] batch tensor back into images (values clamped to [0,1]).
template <typename T>
std::vector<ImageTensor> from_batch(const TensorPtr<T>& batch) {
    detail::require(batch->rank() == 4 && batch->shape[1] == 3, "from_batch: batch must be [n,3,h,w]");
    int64_t n = batch->shape[0], h = batch->shape[2], w = batch->shape[3];
    std::vector<ImageTensor> out;
    out.reserve(n);
    size_t per = static_cast<size_t>(3) * h * w;
    for (int64_t i = 0; i < n; ++i) {
        ImageTensor im(static_cast<int>(h), static_cast<int>(w));
        for (size_t j = 0; j < per; ++j) {
            T v = batch->data[i * per + j];
            im.data[j] = static_cast<float>(std::clamp(v, T(0), T(1)));
        }
        out.push_back(std::move(im));
    }
    return out;
}

}  // namespace steglab
