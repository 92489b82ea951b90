#pragma once

#include "steglab/tensor.hpp"

namespace steglab {

/// Learnable scale/shift plus running statistics for one batch-norm layer.
/// Running variance stores the population variance of recent batches and
/// stays strictly positive (initialized to 1, blended with momentum in (0,1)).
template <typename T>
struct BatchNormState {
    TensorPtr<T> gamma;
    TensorPtr<T> beta;
    TensorPtr<T> running_mean;
    TensorPtr<T> running_var;
    T momentum = T(0.1);
    T epsilon = T(1e-5);
    bool training = true;

    explicit BatchNormState(int64_t channels = 0) {
        if (channels > 0) {
            gamma = make_tensor<T>({channels}, std::vector<T>(channels, T(1)), true);
            beta = make_tensor<T>({channels}, std::vector<T>(channels, T(0)), true);
            running_mean = make_tensor<T>({channels});
            running_var = make_tensor<T>({channels}, std::vector<T>(channels, T(1)));
        }
    }

    int64_t channels() const { return gamma ? gamma->shape[0] : 0; }
};

/// Channelwise batch normalization over an [n,c,h,w] batch.
/// Training mode normalizes by batch statistics over (n,h,w) and folds them
/// into the running estimates; eval mode normalizes by the running estimates.
template <typename T>
TensorPtr<T> batch_norm(const TensorPtr<T>& input, BatchNormState<T>& state) {
    detail::require(input->rank() == 4, "batch_norm: input must be [n,c,h,w], got " +
                                            detail::shape_str(input->shape));
    int64_t n = input->shape[0], c = input->shape[1], h = input->shape[2], w = input->shape[3];
    detail::require(c == state.channels(), "batch_norm: input has " + std::to_string(c) +
                                               " channels but state has " +
                                               std::to_string(state.channels()));
    const int64_t m = n * h * w;
    detail::require(!state.training || m >= 2,
                    "batch_norm: training mode needs at least 2 values per channel");
    const int64_t plane = h * w;
    auto out = make_tensor<T>(input->shape);

    std::vector<T> mean(c), invstd(c);
    if (state.training) {
        for (int64_t ch = 0; ch < c; ++ch) {
            T mu = T(0);
            for (int64_t i = 0; i < n; ++i) {
                const T* p = input->data.data() + (i * c + ch) * plane;
                for (int64_t j = 0; j < plane; ++j) mu += p[j];
            }
            mu /= static_cast<T>(m);
            T var = T(0);
            for (int64_t i = 0; i < n; ++i) {
                const T* p = input->data.data() + (i * c + ch) * plane;
                for (int64_t j = 0; j < plane; ++j) var += (p[j] - mu) * (p[j] - mu);
            }
            var /= static_cast<T>(m);
            mean[ch] = mu;
            invstd[ch] = T(1) / std::sqrt(var + state.epsilon);
            state.running_mean->data[ch] =
                (T(1) - state.momentum) * state.running_mean->data[ch] + state.momentum * mu;
            state.running_var->data[ch] =
                (T(1) - state.momentum) * state.running_var->data[ch] + state.momentum * var;
        }
    } else {
        for (int64_t ch = 0; ch < c; ++ch) {
            mean[ch] = state.running_mean->data[ch];
            invstd[ch] = T(1) / std::sqrt(state.running_var->data[ch] + state.epsilon);
        }
    }

    // Save normalized values for the backward pass.
    auto xhat = std::make_shared<std::vector<T>>(input->numel());
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t ch = 0; ch < c; ++ch) {
            const T* p = input->data.data() + (i * c + ch) * plane;
            T* xh = xhat->data() + (i * c + ch) * plane;
            T* o = out->data.data() + (i * c + ch) * plane;
            T g = state.gamma->data[ch], b = state.beta->data[ch];
            T mu = mean[ch], is = invstd[ch];
            for (int64_t j = 0; j < plane; ++j) {
                xh[j] = (p[j] - mu) * is;
                o[j] = g * xh[j] + b;
            }
        }
    }

    if (detail::wants_graph<T>({input, state.gamma, state.beta})) {
        bool batch_stats = state.training;
        auto istd = std::make_shared<std::vector<T>>(std::move(invstd));
        detail::attach<T>(out, {input, state.gamma, state.beta},
                          [n, c, plane, m, xhat, istd, batch_stats](Tensor<T>& self) {
            auto& in = self.parents[0];
            auto& gamma = self.parents[1];
            auto& beta = self.parents[2];
            std::vector<T> sum_dy(c, T(0)), sum_dy_xh(c, T(0));
            for (int64_t i = 0; i < n; ++i) {
                for (int64_t ch = 0; ch < c; ++ch) {
                    const T* g = self.grad.data() + (i * c + ch) * plane;
                    const T* xh = xhat->data() + (i * c + ch) * plane;
                    T sd = T(0), sdx = T(0);
                    for (int64_t j = 0; j < plane; ++j) {
                        sd += g[j];
                        sdx += g[j] * xh[j];
                    }
                    sum_dy[ch] += sd;
                    sum_dy_xh[ch] += sdx;
                }
            }
            if (gamma->requires_grad) {
                gamma->ensure_grad();
                for (int64_t ch = 0; ch < c; ++ch) gamma->grad[ch] += sum_dy_xh[ch];
            }
            if (beta->requires_grad) {
                beta->ensure_grad();
                for (int64_t ch = 0; ch < c; ++ch) beta->grad[ch] += sum_dy[ch];
            }
            if (in->requires_grad) {
                in->ensure_grad();
                for (int64_t i = 0; i < n; ++i) {
                    for (int64_t ch = 0; ch < c; ++ch) {
                        const T* g = self.grad.data() + (i * c + ch) * plane;
                        const T* xh = xhat->data() + (i * c + ch) * plane;
                        T* gi = in->grad.data() + (i * c + ch) * plane;
                        T k = gamma->data[ch] * (*istd)[ch];
                        if (batch_stats) {
                            T mdy = sum_dy[ch] / static_cast<T>(m);
                            T mdyx = sum_dy_xh[ch] / static_cast<T>(m);
                            for (int64_t j = 0; j < plane; ++j)
                                gi[j] += k * (g[j] - mdy - xh[j] * mdyx);
                        } else {
                            // Running statistics are constants in eval mode.
                            for (int64_t j = 0; j < plane; ++j) gi[j] += k * g[j];
                        }
                    }
                }
            }
        });
    }
    return out;
}

}  // namespace steglab
