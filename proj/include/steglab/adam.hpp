#pragma once

#include "steglab/tensor.hpp"

namespace steglab {

/// Per-parameter Adam moment buffers plus the shared hyperparameters.
template <typename T>
struct AdamState {
    std::vector<T> m;
    std::vector<T> v;
    T learning_rate = T(1e-5);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T epsilon = T(1e-8);
    int64_t step_count = 0;
};

/// One bias-corrected Adam update: param -= lr * m_hat / (sqrt(v_hat) + eps).
/// Rejects non-finite gradients before touching any state.
template <typename T>
void adam_step(const TensorPtr<T>& param, const std::vector<T>& grad, AdamState<T>& state) {
    detail::require(grad.size() == param->data.size(),
                    "adam_step: gradient size does not match parameter size");
    for (T g : grad) {
        if (!std::isfinite(g))
            throw std::runtime_error("adam_step: non-finite gradient, step aborted");
    }
    if (state.m.size() != grad.size()) {
        state.m.assign(grad.size(), T(0));
        state.v.assign(grad.size(), T(0));
    }
    state.step_count += 1;
    const T bc1 = T(1) - std::pow(state.beta1, static_cast<T>(state.step_count));
    const T bc2 = T(1) - std::pow(state.beta2, static_cast<T>(state.step_count));
    for (size_t i = 0; i < grad.size(); ++i) {
        T g = grad[i];
        state.m[i] = state.beta1 * state.m[i] + (T(1) - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (T(1) - state.beta2) * g * g;
        T m_hat = state.m[i] / bc1;
        T v_hat = state.v[i] / bc2;
        param->data[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

template <typename T>
void adam_step(const TensorPtr<T>& param, AdamState<T>& state) {
    detail::require(param->grad.size() == param->data.size(),
                    "adam_step: parameter has no gradient");
    adam_step(param, param->grad, state);
}

}  // namespace steglab
