#pragma once

#include <Eigen/Core>

#include "steglab/tensor.hpp"

namespace steglab {

/// Kernel, bias and geometry of one convolution layer.
/// kernel is [out_ch, in_ch, kh, kw], bias is [out_ch].
template <typename T>
struct ConvParams {
    TensorPtr<T> kernel;
    TensorPtr<T> bias;
    int stride = 1;
    int padding = 0;

    int64_t out_channels() const { return kernel->shape[0]; }
    int64_t in_channels() const { return kernel->shape[1]; }
};

namespace detail {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapRM = Eigen::Map<const MatRM<T>>;

// Unrolls the padded receptive fields of one image into a [in_ch*kh*kw, oh*ow]
// matrix so the convolution becomes a single matrix product.
template <typename T>
void im2col(const T* img, int64_t c, int64_t h, int64_t w, int64_t kh, int64_t kw, int64_t stride,
            int64_t pad, int64_t oh, int64_t ow, T* col) {
    for (int64_t ch = 0; ch < c; ++ch) {
        const T* plane = img + ch * h * w;
        for (int64_t ky = 0; ky < kh; ++ky) {
            for (int64_t kx = 0; kx < kw; ++kx) {
                T* row = col + ((ch * kh + ky) * kw + kx) * oh * ow;
                for (int64_t oy = 0; oy < oh; ++oy) {
                    int64_t iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= h) {
                        std::fill(row + oy * ow, row + (oy + 1) * ow, T(0));
                        continue;
                    }
                    const T* src = plane + iy * w;
                    T* dst = row + oy * ow;
                    for (int64_t ox = 0; ox < ow; ++ox) {
                        int64_t ix = ox * stride + kx - pad;
                        dst[ox] = (ix < 0 || ix >= w) ? T(0) : src[ix];
                    }
                }
            }
        }
    }
}

// Scatter-add of a column matrix back into image layout; adjoint of im2col.
template <typename T>
void col2im_add(const T* col, int64_t c, int64_t h, int64_t w, int64_t kh, int64_t kw,
                int64_t stride, int64_t pad, int64_t oh, int64_t ow, T* img) {
    for (int64_t ch = 0; ch < c; ++ch) {
        T* plane = img + ch * h * w;
        for (int64_t ky = 0; ky < kh; ++ky) {
            for (int64_t kx = 0; kx < kw; ++kx) {
                const T* row = col + ((ch * kh + ky) * kw + kx) * oh * ow;
                for (int64_t oy = 0; oy < oh; ++oy) {
                    int64_t iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= h) continue;
                    T* dst = plane + iy * w;
                    const T* src = row + oy * ow;
                    for (int64_t ox = 0; ox < ow; ++ox) {
                        int64_t ix = ox * stride + kx - pad;
                        if (ix >= 0 && ix < w) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

}  // namespace detail

/// 2-D cross-correlation with bias over an [n,c,h,w] batch.
/// Output spatial size is (h + 2*padding - kh)/stride + 1 per axis.
template <typename T>
TensorPtr<T> conv2d(const TensorPtr<T>& input, const TensorPtr<T>& kernel, const TensorPtr<T>& bias,
                    int stride, int padding) {
    detail::require(input->rank() == 4, "conv2d: input must be [n,c,h,w], got " +
                                            detail::shape_str(input->shape));
    detail::require(kernel->rank() == 4, "conv2d: kernel must be [out_ch,in_ch,kh,kw], got " +
                                             detail::shape_str(kernel->shape));
    detail::require(stride >= 1, "conv2d: stride must be positive");
    detail::require(padding >= 0, "conv2d: padding must be non-negative");
    int64_t n = input->shape[0], c = input->shape[1], h = input->shape[2], w = input->shape[3];
    int64_t oc = kernel->shape[0], kc = kernel->shape[1], kh = kernel->shape[2],
            kw = kernel->shape[3];
    detail::require(kc == c, "conv2d: input has " + std::to_string(c) + " channels but kernel expects " +
                                 std::to_string(kc));
    detail::require(bias->rank() == 1 && bias->shape[0] == oc,
                    "conv2d: bias must be [out_ch] = [" + std::to_string(oc) + "], got " +
                        detail::shape_str(bias->shape));
    int64_t oh = (h + 2 * padding - kh) / stride + 1;
    int64_t ow = (w + 2 * padding - kw) / stride + 1;
    detail::require(h + 2 * padding >= kh && w + 2 * padding >= kw && oh > 0 && ow > 0,
                    "conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                        " yields empty output on " + std::to_string(h) + "x" + std::to_string(w) +
                        " input (padding " + std::to_string(padding) + ")");

    auto out = make_tensor<T>({n, oc, oh, ow});
    const int64_t k = c * kh * kw;
    const int64_t p = oh * ow;
    std::vector<T> col(k * p);
    detail::CMapRM<T> kmat(kernel->data.data(), oc, k);
    for (int64_t i = 0; i < n; ++i) {
        detail::im2col(input->data.data() + i * c * h * w, c, h, w, kh, kw, stride, padding, oh, ow,
                       col.data());
        detail::CMapRM<T> cmat(col.data(), k, p);
        detail::MapRM<T> omat(out->data.data() + i * oc * p, oc, p);
        omat.noalias() = kmat * cmat;
        for (int64_t ch = 0; ch < oc; ++ch) omat.row(ch).array() += bias->data[ch];
    }

    if (detail::wants_graph<T>({input, kernel, bias})) {
        detail::attach<T>(out, {input, kernel, bias},
                          [n, c, h, w, oc, kh, kw, stride, padding, oh, ow](Tensor<T>& self) {
            auto& in = self.parents[0];
            auto& ker = self.parents[1];
            auto& b = self.parents[2];
            const int64_t k = c * kh * kw;
            const int64_t p = oh * ow;
            std::vector<T> col(k * p);
            std::vector<T> dcol;
            detail::CMapRM<T> kmat(ker->data.data(), oc, k);
            if (in->requires_grad) {
                in->ensure_grad();
                dcol.resize(k * p);
            }
            if (ker->requires_grad) ker->ensure_grad();
            if (b->requires_grad) b->ensure_grad();
            for (int64_t i = 0; i < n; ++i) {
                detail::CMapRM<T> gmat(self.grad.data() + i * oc * p, oc, p);
                if (ker->requires_grad || in->requires_grad) {
                    detail::im2col(in->data.data() + i * c * h * w, c, h, w, kh, kw, stride,
                                   padding, oh, ow, col.data());
                }
                if (ker->requires_grad) {
                    detail::CMapRM<T> cmat(col.data(), k, p);
                    detail::MapRM<T> kg(ker->grad.data(), oc, k);
                    kg.noalias() += gmat * cmat.transpose();
                }
                if (b->requires_grad) {
                    for (int64_t ch = 0; ch < oc; ++ch) b->grad[ch] += gmat.row(ch).sum();
                }
                if (in->requires_grad) {
                    detail::MapRM<T> dcmat(dcol.data(), k, p);
                    dcmat.noalias() = kmat.transpose() * gmat;
                    detail::col2im_add(dcol.data(), c, h, w, kh, kw, stride, padding, oh, ow,
                                       in->grad.data() + i * c * h * w);
                }
            }
        });
    }
    return out;
}

template <typename T>
TensorPtr<T> conv2d(const TensorPtr<T>& input, const ConvParams<T>& params) {
    return conv2d(input, params.kernel, params.bias, params.stride, params.padding);
}

/// Per-channel 3x3 convolution with "same" zero padding, stride 1, no bias.
/// kernel is [c,1,3,3].
template <typename T>
TensorPtr<T> depthwise_conv2d(const TensorPtr<T>& input, const TensorPtr<T>& kernel) {
    detail::require(input->rank() == 4, "depthwise_conv2d: input must be [n,c,h,w]");
    detail::require(kernel->rank() == 4 && kernel->shape[1] == 1 && kernel->shape[2] == 3 &&
                        kernel->shape[3] == 3,
                    "depthwise_conv2d: kernel must be [c,1,3,3], got " +
                        detail::shape_str(kernel->shape));
    int64_t n = input->shape[0], c = input->shape[1], h = input->shape[2], w = input->shape[3];
    detail::require(kernel->shape[0] == c, "depthwise_conv2d: input has " + std::to_string(c) +
                                               " channels but kernel has " +
                                               std::to_string(kernel->shape[0]));
    auto out = make_tensor<T>({n, c, h, w});
    // Each 3x3 tap is a shifted axpy over the overlapping rectangle.
    auto apply_tap = [h, w](const T* src, T* dst, T kv, int64_t dy, int64_t dx) {
        int64_t y0 = std::max<int64_t>(0, -dy), y1 = std::min(h, h - dy);
        int64_t x0 = std::max<int64_t>(0, -dx), x1 = std::min(w, w - dx);
        for (int64_t y = y0; y < y1; ++y) {
            const T* s = src + (y + dy) * w + dx;
            T* d = dst + y * w;
            for (int64_t x = x0; x < x1; ++x) d[x] += kv * s[x];
        }
    };
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t ch = 0; ch < c; ++ch) {
            const T* src = input->data.data() + (i * c + ch) * h * w;
            T* dst = out->data.data() + (i * c + ch) * h * w;
            for (int64_t ky = 0; ky < 3; ++ky)
                for (int64_t kx = 0; kx < 3; ++kx)
                    apply_tap(src, dst, kernel->data[(ch * 9) + ky * 3 + kx], ky - 1, kx - 1);
        }
    }
    if (detail::wants_graph<T>({input, kernel})) {
        detail::attach<T>(out, {input, kernel}, [n, c, h, w, apply_tap](Tensor<T>& self) {
            auto& in = self.parents[0];
            auto& ker = self.parents[1];
            if (in->requires_grad) in->ensure_grad();
            if (ker->requires_grad) ker->ensure_grad();
            for (int64_t i = 0; i < n; ++i) {
                for (int64_t ch = 0; ch < c; ++ch) {
                    const T* g = self.grad.data() + (i * c + ch) * h * w;
                    const T* x = in->data.data() + (i * c + ch) * h * w;
                    for (int64_t ky = 0; ky < 3; ++ky) {
                        for (int64_t kx = 0; kx < 3; ++kx) {
                            int64_t dy = ky - 1, dx = kx - 1;
                            if (in->requires_grad) {
                                // dIn[y+dy][x+dx] += k * g[y][x] == tap with negated shift
                                apply_tap(g, in->grad.data() + (i * c + ch) * h * w,
                                          ker->data[ch * 9 + ky * 3 + kx], -dy, -dx);
                            }
                            if (ker->requires_grad) {
                                int64_t y0 = std::max<int64_t>(0, -dy), y1 = std::min(h, h - dy);
                                int64_t x0 = std::max<int64_t>(0, -dx), x1 = std::min(w, w - dx);
                                T acc = T(0);
                                for (int64_t y = y0; y < y1; ++y) {
                                    const T* gr = g + y * w;
                                    const T* xr = x + (y + dy) * w + dx;
                                    for (int64_t xx = x0; xx < x1; ++xx) acc += gr[xx] * xr[xx];
                                }
                                ker->grad[ch * 9 + ky * 3 + kx] += acc;
                            }
                        }
                    }
                }
            }
        });
    }
    return out;
}

/// Depthwise 3x3 (same padding) followed by a pointwise 1x1 convolution.
template <typename T>
TensorPtr<T> separable_conv2d(const TensorPtr<T>& input, const TensorPtr<T>& depthwise_kernel,
                              const ConvParams<T>& pointwise) {
    detail::require(pointwise.kernel->shape[2] == 1 && pointwise.kernel->shape[3] == 1,
                    "separable_conv2d: pointwise kernel must be 1x1, got " +
                        detail::shape_str(pointwise.kernel->shape));
    return conv2d(depthwise_conv2d(input, depthwise_kernel), pointwise);
}

}  // namespace steglab
