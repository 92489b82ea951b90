#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>

#include "steglab/adam.hpp"
#include "steglab/batchnorm.hpp"
#include "steglab/conv.hpp"
#include "steglab/rng.hpp"
#include "steglab/tensor.hpp"

namespace steglab {

inline constexpr int64_t kStegNetChannels = 32;
inline constexpr int kStegNetBlocks = 6;
inline constexpr int64_t kImageChannels = 3;

template <typename T>
using NamedTensors = std::vector<std::pair<std::string, TensorPtr<T>>>;

/// Square "same"-padded convolution layer; kernels start He-normal
/// (std = sqrt(2/fan_in), suited to the ELU family), biases start at zero.
template <typename T>
struct Conv2dLayer {
    ConvParams<T> params;

    Conv2dLayer() = default;
    Conv2dLayer(int64_t in_ch, int64_t out_ch, int64_t ksize, Rng& rng) {
        std::vector<T> k(out_ch * in_ch * ksize * ksize);
        T stddev = std::sqrt(T(2) / static_cast<T>(in_ch * ksize * ksize));
        for (auto& v : k) v = static_cast<T>(rng.next_normal()) * stddev;
        params.kernel = make_tensor<T>({out_ch, in_ch, ksize, ksize}, std::move(k), true);
        params.bias = make_tensor<T>({out_ch}, std::vector<T>(out_ch, T(0)), true);
        params.stride = 1;
        params.padding = static_cast<int>(ksize / 2);
    }

    TensorPtr<T> forward(const TensorPtr<T>& x) const { return conv2d(x, params); }
};

/// Separable convolution with residual block: depthwise 3x3, pointwise 1x1,
/// batch norm, ELU, then the identity skip. Channel count is preserved so the
/// skip is a plain addition.
template <typename T>
struct ScrBlock {
    TensorPtr<T> depthwise;
    Conv2dLayer<T> pointwise;
    BatchNormState<T> bn;

    ScrBlock() = default;
    ScrBlock(int64_t channels, Rng& rng) : pointwise(channels, channels, 1, rng), bn(channels) {
        std::vector<T> k(channels * 9);
        T stddev = std::sqrt(T(2) / T(9));
        for (auto& v : k) v = static_cast<T>(rng.next_normal()) * stddev;
        depthwise = make_tensor<T>({channels, 1, 3, 3}, std::move(k), true);
    }

    TensorPtr<T> forward(const TensorPtr<T>& x) {
        auto y = separable_conv2d(x, depthwise, pointwise.params);
        return add(elu(batch_norm(y, bn)), x);
    }
};

/// One half of StegNet: a lifting convolution up to 32 channels, six SCR
/// blocks, a reducing convolution back to image space, and a sigmoid squash
/// that pins outputs to [0,1]. The encoder takes 6 input channels
/// (cover and hidden concatenated), the decoder takes 3.
template <typename T>
class StegNetCoder {
public:
    StegNetCoder() = default;
    StegNetCoder(int64_t in_ch, Rng& rng)
        : in_channels_(in_ch), lifting_(in_ch, kStegNetChannels, 3, rng) {
        for (auto& b : blocks_) b = ScrBlock<T>(kStegNetChannels, rng);
        reducing_ = Conv2dLayer<T>(kStegNetChannels, kImageChannels, 3, rng);
    }

    TensorPtr<T> forward(const TensorPtr<T>& x) {
        auto y = lifting_.forward(x);
        for (auto& b : blocks_) y = b.forward(y);
        return sigmoid(reducing_.forward(y));
    }

    void set_training(bool training) {
        for (auto& b : blocks_) b.bn.training = training;
    }

    int64_t in_channels() const { return in_channels_; }

    NamedTensors<T> named_parameters(const std::string& prefix) {
        NamedTensors<T> out;
        out.emplace_back(prefix + "lifting.kernel", lifting_.params.kernel);
        out.emplace_back(prefix + "lifting.bias", lifting_.params.bias);
        for (int i = 0; i < kStegNetBlocks; ++i) {
            std::string p = prefix + "block" + std::to_string(i) + ".";
            out.emplace_back(p + "depthwise", blocks_[i].depthwise);
            out.emplace_back(p + "pointwise.kernel", blocks_[i].pointwise.params.kernel);
            out.emplace_back(p + "pointwise.bias", blocks_[i].pointwise.params.bias);
            out.emplace_back(p + "bn.gamma", blocks_[i].bn.gamma);
            out.emplace_back(p + "bn.beta", blocks_[i].bn.beta);
        }
        out.emplace_back(prefix + "reducing.kernel", reducing_.params.kernel);
        out.emplace_back(prefix + "reducing.bias", reducing_.params.bias);
        return out;
    }

    NamedTensors<T> named_buffers(const std::string& prefix) {
        NamedTensors<T> out;
        for (int i = 0; i < kStegNetBlocks; ++i) {
            std::string p = prefix + "block" + std::to_string(i) + ".bn.";
            out.emplace_back(p + "running_mean", blocks_[i].bn.running_mean);
            out.emplace_back(p + "running_var", blocks_[i].bn.running_var);
        }
        return out;
    }

private:
    int64_t in_channels_ = 0;
    Conv2dLayer<T> lifting_;
    std::array<ScrBlock<T>, kStegNetBlocks> blocks_;
    Conv2dLayer<T> reducing_;
};

/// The full encoder/decoder pair. `image_size` fixes the expected spatial
/// extent of inputs (64 for the real pipeline; smaller in numeric probes).
template <typename T>
class StegNetModel {
public:
    explicit StegNetModel(uint64_t init_seed = 0, int64_t image_size = 64)
        : image_size_(image_size) {
        Rng rng(init_seed);
        encoder_ = StegNetCoder<T>(2 * kImageChannels, rng);
        decoder_ = StegNetCoder<T>(kImageChannels, rng);
    }

    /// Embeds `hidden` into `cover`; both are [n,3,s,s] batches in [0,1].
    TensorPtr<T> encode(const TensorPtr<T>& cover, const TensorPtr<T>& hidden) {
        check_batch(cover, "encode: cover");
        check_batch(hidden, "encode: hidden");
        detail::require(cover->shape == hidden->shape,
                        "encode: cover and hidden batch shapes differ");
        return encoder_.forward(concat_channels(cover, hidden));
    }

    /// Recovers the hidden image batch from an embedded batch.
    TensorPtr<T> decode(const TensorPtr<T>& embedded) {
        check_batch(embedded, "decode: embedded");
        return decoder_.forward(embedded);
    }

    void set_training(bool training) {
        encoder_.set_training(training);
        decoder_.set_training(training);
    }

    NamedTensors<T> named_parameters() {
        auto out = encoder_.named_parameters("encoder.");
        auto dec = decoder_.named_parameters("decoder.");
        out.insert(out.end(), dec.begin(), dec.end());
        return out;
    }

    NamedTensors<T> named_buffers() {
        auto out = encoder_.named_buffers("encoder.");
        auto dec = decoder_.named_buffers("decoder.");
        out.insert(out.end(), dec.begin(), dec.end());
        return out;
    }

    NamedTensors<T> named_state() {
        auto out = named_parameters();
        auto buf = named_buffers();
        out.insert(out.end(), buf.begin(), buf.end());
        return out;
    }

    int64_t image_size() const { return image_size_; }

private:
    void check_batch(const TensorPtr<T>& x, const std::string& who) const {
        detail::require(x->rank() == 4 && x->shape[1] == kImageChannels &&
                            x->shape[2] == image_size_ && x->shape[3] == image_size_,
                        who + ": expected [n,3," + std::to_string(image_size_) + "," +
                            std::to_string(image_size_) + "], got " + detail::shape_str(x->shape));
        for (T v : x->data)
            detail::require(v >= T(0) && v <= T(1), who + ": values must lie in [0,1]");
    }

    int64_t image_size_ = 64;
    StegNetCoder<T> encoder_;
    StegNetCoder<T> decoder_;
};

/// The four loss components and their mean.
template <typename T>
struct LossParts {
    TensorPtr<T> total;
    TensorPtr<T> l_ce;     // mean |E - C|
    TensorPtr<T> l_hd;     // mean |D - H|
    TensorPtr<T> var_ce;   // batch mean of per-image variance of |E - C|
    TensorPtr<T> var_hd;   // batch mean of per-image variance of |D - H|
};

/// Loss = (L_CE + L_HD + Var_CE + Var_HD) / 4. The variance terms take each
/// image's absolute-error map over (c,h,w), so error concentrated on few
/// pixels costs more than the same total error spread evenly.
template <typename T>
LossParts<T> stegnet_loss(const TensorPtr<T>& cover, const TensorPtr<T>& hidden,
                          const TensorPtr<T>& embedded, const TensorPtr<T>& decoded) {
    detail::require(cover->shape == embedded->shape && hidden->shape == decoded->shape &&
                        cover->shape == hidden->shape,
                    "stegnet_loss: all four batches must share one shape");
    detail::require(cover->rank() == 4, "stegnet_loss: batches must be [n,c,h,w]");
    auto ce_map = abs(sub(embedded, cover));
    auto hd_map = abs(sub(decoded, hidden));
    LossParts<T> parts;
    parts.l_ce = mean_all(ce_map);
    parts.l_hd = mean_all(hd_map);
    parts.var_ce = mean_all(variance_per_image(ce_map));
    parts.var_hd = mean_all(variance_per_image(hd_map));
    parts.total = scale(add(add(parts.l_ce, parts.l_hd), add(parts.var_ce, parts.var_hd)),
                        T(0.25));
    return parts;
}

/// Adam over a named parameter set, one moment state per parameter.
template <typename T>
class AdamOptimizer {
public:
    AdamOptimizer() = default;
    AdamOptimizer(T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const NamedTensors<T>& params) {
        for (const auto& [name, p] : params) {
            p->ensure_grad();
            adam_step(p, p->grad, state_for(name, p->numel()));
        }
    }

    void zero_grad(const NamedTensors<T>& params) {
        for (const auto& [name, p] : params) p->zero_grad();
    }

    AdamState<T>& state_for(const std::string& name, int64_t numel) {
        auto it = states_.find(name);
        if (it == states_.end()) {
            AdamState<T> s;
            s.learning_rate = lr_;
            s.beta1 = beta1_;
            s.beta2 = beta2_;
            s.epsilon = eps_;
            s.m.assign(numel, T(0));
            s.v.assign(numel, T(0));
            it = states_.emplace(name, std::move(s)).first;
        }
        return it->second;
    }

    const std::map<std::string, AdamState<T>>& states() const { return states_; }
    std::map<std::string, AdamState<T>>& states() { return states_; }

    T learning_rate() const { return lr_; }
    T beta1() const { return beta1_; }
    T beta2() const { return beta2_; }
    T epsilon() const { return eps_; }

private:
    T lr_ = T(1e-5);
    T beta1_ = T(0.9);
    T beta2_ = T(0.999);
    T eps_ = T(1e-8);
    std::map<std::string, AdamState<T>> states_;
};

}  // namespace steglab
